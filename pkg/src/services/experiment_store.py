"""
Write-once artifact store for experiment outputs.
"""
import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import pandas as pd

from ..utils.logging_config import logger


class ExperimentStore:
    """
    Collects CSV tables, JSON documents and text in memory and writes them
    to ``out_dir`` in one pass once every computation has finished.
    """

    def __init__(self, out_dir: Union[str, Path]):
        self.out_dir = Path(out_dir)
        self._tables: Dict[str, pd.DataFrame] = {}
        self._documents: Dict[str, Any] = {}
        self._texts: Dict[str, str] = {}
        self.written: List[Path] = []

    def add_table(self, name: str, frame: pd.DataFrame,
                  columns: Optional[List[str]] = None) -> None:
        self._tables[name] = frame.loc[:, columns] if columns else frame

    def add_json(self, name: str, document: Any) -> None:
        self._documents[name] = document

    def add_text(self, name: str, text: str) -> None:
        self._texts[name] = text

    @property
    def pending(self) -> List[str]:
        return sorted([*self._tables, *self._documents, *self._texts])

    def flush(self) -> List[Path]:
        """Write every pending artifact; raises OSError on I/O failure."""
        self.out_dir.mkdir(parents=True, exist_ok=True)

        for name, frame in self._tables.items():
            path = self.out_dir / name
            # float_format=None keeps shortest round-trip reprs
            frame.to_csv(path, index=False, lineterminator="\n")
            self.written.append(path)

        for name, document in self._documents.items():
            path = self.out_dir / name
            with open(path, 'w', encoding='utf-8', newline='\n') as f:
                json.dump(document, f, indent=2, sort_keys=True)
                f.write("\n")
            self.written.append(path)

        for name, text in self._texts.items():
            path = self.out_dir / name
            with open(path, 'w', encoding='utf-8', newline='\n') as f:
                f.write(text)
            self.written.append(path)

        logger.info("Artifacts written", {
            "out_dir": str(self.out_dir),
            "files": [p.name for p in self.written],
        })
        self._tables.clear()
        self._documents.clear()
        self._texts.clear()
        return list(self.written)

    def read_csv(self, name: str) -> pd.DataFrame:
        """Re-parse an emitted CSV."""
        return pd.read_csv(self.out_dir / name, float_precision="round_trip")
