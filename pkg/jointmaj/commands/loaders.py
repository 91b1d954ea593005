from typing import TypeVar

from pydantic import BaseModel

from jointmaj.utils.io import read_json

Schema = TypeVar("Schema", bound=BaseModel)


def load(path: str, schema: type[Schema]) -> Schema:
    """Parse a JSON file into ``schema``; ValidationError surfaces as exit 2."""
    return schema.model_validate(read_json(path))


def load_many(path: str, schema: type[Schema]) -> list[Schema]:
    payload = read_json(path)
    if isinstance(payload, list):
        return [schema.model_validate(item) for item in payload]
    return [schema.model_validate(payload)]
