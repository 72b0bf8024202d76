import os

import pytest


def pytest_collection_modifyitems(config, items):
    """Tests marked 'full' only run when DIMERTRAP_FULL=1 (long-running)."""
    if os.environ.get("DIMERTRAP_FULL") == "1":
        return
    skip = pytest.mark.skip(reason="long-running; set DIMERTRAP_FULL=1 to enable")
    for item in items:
        if "full" in item.keywords:
            item.add_marker(skip)
