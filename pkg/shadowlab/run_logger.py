"""
Run Logger
One log file per CLI run
Layout: logs/YYYY-Www/YYYYMMDD_HHMMSS_<command>.log
"""

import logging
import shutil
import sys
from datetime import datetime
from pathlib import Path
from typing import Dict, Optional

from . import config

_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'


class RunLogger:
    def __init__(self, base_dir: str = config.LOG_DIR):
        self.base_dir = Path(base_dir)
        self.base_dir.mkdir(parents=True, exist_ok=True)
        self._handler: Optional[logging.FileHandler] = None

    def get_week_folder(self) -> Path:
        """Folder of the current ISO week, e.g. 2026-W42"""
        year, week, _ = datetime.now().isocalendar()
        week_folder = self.base_dir / f"{year}-W{week:02d}"
        week_folder.mkdir(exist_ok=True)
        return week_folder

    def create_log_file(self, command: Optional[str] = None) -> Path:
        timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
        filename = f"{timestamp}_{command or 'no-command'}.log"
        return self.get_week_folder() / filename

    def _header(self, command: Optional[str], settings: Optional[Dict]) -> str:
        lines = [
            "=" * 80,
            "SHADOWLAB - Run Log",
            f"Command: {command or 'N/A'}",
            f"Timestamp: {datetime.now().isoformat()}",
        ]
        for key, value in sorted((settings or {}).items()):
            lines.append(f"{key}: {value}")
        lines.append("=" * 80)
        return "\n".join(lines) + "\n\n"

    def start_run(self, command: str, settings: Optional[Dict] = None) -> Path:
        """
        Open the run's log file and route the root logger into it

        Args:
            command: CLI subcommand, used in the file name
            settings: effective configuration written to the header

        Returns:
            Path of the log file
        """
        self.end_run()
        log_file = self.create_log_file(command)
        with open(log_file, 'w', encoding='utf-8') as f:
            f.write(self._header(command, settings))

        self._handler = logging.FileHandler(log_file, mode='a', encoding='utf-8')
        self._handler.setFormatter(logging.Formatter(_FORMAT))
        logging.getLogger().addHandler(self._handler)
        return log_file

    def end_run(self):
        if self._handler is not None:
            logging.getLogger().removeHandler(self._handler)
            self._handler.close()
            self._handler = None

    def write_log(self, command: Optional[str], content: str) -> str:
        """Write a finished block of text as its own log file"""
        log_file = self.create_log_file(command)
        with open(log_file, 'w', encoding='utf-8') as f:
            f.write(self._header(command, None))
            f.write(content)
        return str(log_file)

    def cleanup_old_logs(self, weeks_to_keep: int = 4):
        """Remove week folders older than weeks_to_keep"""
        if not self.base_dir.exists():
            return

        current_year, current_week, _ = datetime.now().isocalendar()
        for folder in self.base_dir.iterdir():
            if not folder.is_dir():
                continue
            parts = folder.name.split('-W')
            if len(parts) != 2 or not all(p.isdigit() for p in parts):
                continue

            week_diff = (current_year - int(parts[0])) * 52 + (current_week - int(parts[1]))
            if week_diff > weeks_to_keep:
                logging.getLogger(__name__).info(f"[Logs] removing {folder.name}")
                shutil.rmtree(folder)


def configure_logging(level: str = config.LOG_LEVEL):
    """Install a stderr handler on the root logger once"""
    root = logging.getLogger()
    root.setLevel(level.upper())
    if not any(getattr(h, '_shadowlab', False) for h in root.handlers):
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter('%(levelname)s %(message)s'))
        handler._shadowlab = True
        root.addHandler(handler)


# Singleton instance
_logger_instance = None


def get_run_logger() -> RunLogger:
    global _logger_instance
    if _logger_instance is None:
        _logger_instance = RunLogger(config.LOG_DIR)
    return _logger_instance
