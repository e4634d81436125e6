"""Storage for experiment summaries served by the API.

Usage:
    store = await create_result_store()

    await store.put(plan.plan_id, summary_dict, plan.resolved())
    entry = await store.get(plan.plan_id)
    recent = await store.list(limit=20)
"""

import asyncio
import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from config import config


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _entry(plan_id: str, summary: dict, plan: dict) -> dict:
    return {
        "plan_id": plan_id,
        "plan": plan,
        "summary": summary,
        "created_at": _now(),
    }


def _listing(entry: dict) -> dict:
    return {
        "plan_id": entry["plan_id"],
        "created_at": entry["created_at"],
        "n_values": entry["plan"].get("n_values"),
        "trials_per_n": entry["plan"].get("trials_per_n"),
    }


# =============================================================================
# File Store
# =============================================================================

class FileResultStore:
    """One ``<plan_id>.json`` per summary under ``root``."""

    def __init__(self, root: str | Path = None):
        self.root = Path(root or Path(config.results_dir) / "store")

    async def initialize(self):
        """Create the directory and make sure it is writable."""
        await asyncio.to_thread(self.root.mkdir, parents=True, exist_ok=True)
        marker = self.root / ".write_check"
        await asyncio.to_thread(marker.write_text, "")
        await asyncio.to_thread(marker.unlink)
        print(f"✓ File result store: {self.root}")

    async def close(self):
        pass

    async def __aenter__(self):
        await self.initialize()
        return self

    async def __aexit__(self, *args):
        await self.close()

    def _path(self, plan_id: str) -> Path:
        if not plan_id.isalnum():
            raise ValueError(f"Invalid plan id: {plan_id}")
        return self.root / f"{plan_id}.json"

    async def put(self, plan_id: str, summary: dict, plan: dict) -> dict:
        entry = _entry(plan_id, summary, plan)
        text = json.dumps(entry, indent=2, sort_keys=True)
        await asyncio.to_thread(self._path(plan_id).write_text, text)
        return entry

    async def get(self, plan_id: str) -> Optional[dict]:
        try:
            text = await asyncio.to_thread(self._path(plan_id).read_text)
        except (OSError, ValueError):
            return None
        return json.loads(text)

    async def delete(self, plan_id: str) -> bool:
        try:
            await asyncio.to_thread(self._path(plan_id).unlink)
            return True
        except (OSError, ValueError):
            return False

    async def list(self, limit: int = 50) -> list[dict]:
        """Stored plans, newest first."""
        entries = []
        for path in self.root.glob("*.json"):
            entry = await self.get(path.stem)
            if entry:
                entries.append(entry)
        entries.sort(key=lambda e: e.get("created_at", ""), reverse=True)
        return [_listing(e) for e in entries[:limit]]


# =============================================================================
# Fallback In-Memory Store (for development/testing)
# =============================================================================

class InMemoryResultStore:
    """In-memory result store for local development."""

    def __init__(self):
        self._entries: dict[str, dict] = {}

    async def initialize(self):
        print("✓ Using in-memory result storage")

    async def close(self):
        pass

    async def __aenter__(self):
        await self.initialize()
        return self

    async def __aexit__(self, *args):
        await self.close()

    async def put(self, plan_id: str, summary: dict, plan: dict) -> dict:
        entry = _entry(plan_id, summary, plan)
        self._entries[plan_id] = entry
        return entry

    async def get(self, plan_id: str) -> Optional[dict]:
        return self._entries.get(plan_id)

    async def delete(self, plan_id: str) -> bool:
        if plan_id in self._entries:
            del self._entries[plan_id]
            return True
        return False

    async def list(self, limit: int = 50) -> list[dict]:
        entries = sorted(
            self._entries.values(),
            key=lambda e: e.get("created_at", ""),
            reverse=True,
        )[:limit]
        return [_listing(e) for e in entries]


# =============================================================================
# Factory
# =============================================================================

async def create_result_store(kind: str = None):
    """Create and initialize the store named by DISPERSION_RESULT_STORE.

    Falls back to in-memory when the file store cannot be initialized.
    """
    kind = kind or config.result_store
    if kind == "files":
        store = FileResultStore()
        try:
            await store.initialize()
            return store
        except OSError as e:
            print(f"⚠️  File result store unavailable ({e}), falling back to in-memory")
    store = InMemoryResultStore()
    await store.initialize()
    return store


__all__ = ["FileResultStore", "InMemoryResultStore", "create_result_store"]
