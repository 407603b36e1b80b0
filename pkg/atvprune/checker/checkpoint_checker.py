from typing import Any, Dict, List
from .interface import AbsChecker
from atvprune.errors import StorageError
from atvprune.storage import decode_header


class CheckpointHeaderChecker(AbsChecker):
    """Prefix, header and tensor table of a checkpoint, without the payload."""

    @property
    def name(self) -> str:
        return "checkpoint-header"

    def check(self, file_path: str) -> List[Dict[str, Any]]:
        try:
            with open(file_path, "rb") as f:
                data = f.read()
            header, start = decode_header(data)
        except StorageError as e:
            return [{"line": 0, "column": 0, "message": e.message, "code": e.code}]
        except OSError as e:
            return [{"line": 0, "column": 0, "message": str(e), "code": "io"}]

        payload = len(data) - start
        last = header["tensors"][-1] if header["tensors"] else None
        if last is not None:
            size = 4
            for dim in last["shape"]:
                size *= dim
            if last["offset"] + size > payload:
                return [
                    {
                        "line": 0,
                        "column": 0,
                        "message": f"{last['name']} runs past the end of the payload",
                        "code": "truncated-payload",
                    }
                ]
        return []
