from typing import Any, Dict, Mapping
from pydantic import BaseModel


class BaseSchema(BaseModel, Mapping[str, Any]):
    """
    A Pydantic BaseModel that:
      - Rejects undeclared fields, so a misspelt key is an error rather than a default
      - Exposes a Mapping interface (so you can do dict-style access/iteration)
    """

    model_config = {"extra": "forbid", "validate_assignment": True, "frozen": False}

    def to_dict(self) -> Dict[str, Any]:
        return self.model_dump(mode="python")

    def __getitem__(self, key: str) -> Any:
        return self.to_dict()[key]

    def __iter__(self):
        return iter(self.to_dict())

    def __len__(self) -> int:
        return len(self.to_dict())

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}({self.to_dict()})"
