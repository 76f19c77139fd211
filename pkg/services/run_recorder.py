import json
import os
import uuid
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional

from utils.logger import get_logger

logger = get_logger(__name__)


class RunRecorder:
    """Persist verify runs as JSON records under <data_dir>/logs.

    The report inside a record is stored untouched; timing metadata lives
    next to it so the report itself stays reproducible.
    """

    def __init__(self, config: Dict[str, Any]):
        recording = config.get('recording', {})
        self.enabled = recording.get('enabled', True)
        self.log_dir = recording.get('directory') or os.path.join(config.get('data_dir', 'data'), 'logs')
        if self.enabled:
            os.makedirs(self.log_dir, exist_ok=True)

    def record(self, problem: Dict[str, Any], report: Dict[str, Any], duration_seconds: float) -> Optional[str]:
        if not self.enabled:
            return None

        run_id = str(uuid.uuid4())
        record = {
            'run_id': run_id,
            'recorded_at': datetime.now(timezone.utc).isoformat(),
            'duration_seconds': duration_seconds,
            'problem': problem,
            'report': report,
        }
        path = os.path.join(self.log_dir, f"{run_id}.json")
        with open(path, 'w') as f:
            json.dump(record, f, indent=2)

        logger.info(f"Recorded run {run_id} ({report.get('status')}, {duration_seconds:.2f}s)")
        return run_id

    def get_run(self, run_id: str) -> Optional[Dict[str, Any]]:
        """Load a run by full id or unique prefix"""

        if not os.path.isdir(self.log_dir):
            return None
        matches = [name for name in os.listdir(self.log_dir) if name.startswith(run_id) and name.endswith('.json')]
        if len(matches) != 1:
            if len(matches) > 1:
                logger.warning(f"Run prefix {run_id} is ambiguous ({len(matches)} matches)")
            return None
        with open(os.path.join(self.log_dir, matches[0]), 'r') as f:
            return json.load(f)

    def get_recent_runs(self, limit: int = 10) -> List[Dict[str, Any]]:
        if not os.path.isdir(self.log_dir):
            return []

        runs = []
        for name in os.listdir(self.log_dir):
            if not name.endswith('.json'):
                continue
            try:
                with open(os.path.join(self.log_dir, name), 'r') as f:
                    runs.append(json.load(f))
            except (OSError, json.JSONDecodeError) as e:
                logger.warning(f"Could not load run file {name}: {e}")

        runs.sort(key=lambda run: run.get('recorded_at', ''), reverse=True)
        return runs[:limit]
