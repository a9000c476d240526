from dataclasses import dataclass
from pathlib import Path
from typing import Any
from schemas.run_schema import RunConfig, load_run_config
from utils.hydra_utils import HydraUtils


@dataclass
class AppConfig:
    """Process-wide store: application settings (logs, output root) and the active run file."""

    settings: Any | None = None
    run: RunConfig | None = None

    @classmethod
    def load(
        cls,
        config_dir: str | Path | None = None,
        config_file: str | None = None,
        overrides: list[str] | None = None,
    ):
        cls.settings = HydraUtils.load_config(config_dir, config_file, overrides)

    @classmethod
    def load_run(cls, path: str | Path | None = None, overrides: list[str] | None = None) -> RunConfig:
        """Validate a run file and keep it; the file is backed up with the settings."""
        cls.run = load_run_config(path, overrides)
        if path is not None:
            HydraUtils.backup(path)
        return cls.run

    @classmethod
    def output_dir(cls) -> Path:
        """Directory for command outputs: the run file's choice, else the per-run default."""
        if cls.run is not None and cls.run.output.directory:
            return Path(cls.run.output.directory)
        return Path(cls.settings["outputs"]["directory"])
