"""Guardrails for validating experiment configuration dictionaries."""
from typing import Type, TypeVar, Optional
from pydantic import BaseModel, ValidationError
import logging

logger = logging.getLogger(__name__)

T = TypeVar('T', bound=BaseModel)


def validate_config(config_dict: dict, schema: Type[T]) -> Optional[T]:
    """Validate a merged configuration dict against a Pydantic schema.

    Returns None (after logging every violation) when the dict is invalid.
    """
    try:
        return schema(**config_dict)
    except ValidationError as e:
        for error in e.errors():
            location = ".".join(str(part) for part in error["loc"]) or "<root>"
            logger.error(f"Invalid configuration value for {location}: {error['msg']}")
        logger.debug(f"Rejected configuration: {config_dict}")
        return None
    except TypeError as e:
        logger.error(f"Malformed configuration: {e}")
        return None
