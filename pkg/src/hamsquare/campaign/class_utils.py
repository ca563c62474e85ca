"""Provide helpers for reading enum values typed by people or found in old records."""

from enum import Enum


def normalize_token(value: object) -> str:
    """Lower-case a token and use hyphens as the only word separator."""
    return str(value).strip().lower().replace("_", "-").replace(" ", "-")


def map_to_enum(cls: type[Enum], value: object, mapping: dict[str, Enum]) -> Enum:
    """Use in enum _missing_ methods to accept alternate spellings.

    The value is normalized first, so ``H_PROPERTY`` finds ``h-property``.

    :param cls: enum being constructed
    :param value: raw value
    :param mapping: aliases keyed by normalized token
    :return: matching member
    :raise ValueError: if nothing matches
    """
    key = normalize_token(value)
    if key in mapping:
        return mapping[key]
    for member in cls:
        if member.value == key:
            return member
    msg = f"'{value}' is not a valid {cls.__name__}"
    raise ValueError(msg)
