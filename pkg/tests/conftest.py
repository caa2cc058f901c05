import os
import time
from pathlib import Path

import pytest

from fasfair import Scenario, SystemParams

GOLDEN = Path(__file__).parent / "golden"
REGEN = os.environ.get("FASFAIR_REGEN_GOLDEN") == "1"


@pytest.fixture
def fig1():
    return Scenario()


@pytest.fixture
def fig3():
    return Scenario(n_c=2, n_e=6, w_c=1.0, w_e=5.0)


@pytest.fixture
def fig2():
    return Scenario(n_c=2, n_e=20, w_c=1.0, w_e=5.0)


@pytest.fixture
def fig5_general():
    return Scenario(SystemParams(p_dbm=20.0), n_c=4, n_e=6, w_c=2.0, w_e=5.0)


_FIG_CACHE: dict = {}


def figure_csv(fig_id: int, workers: int) -> tuple[str, float]:
    """Figure CSV text and its wall time, computed once per session."""
    from fasfair.figures import run_figure

    key = (fig_id, workers)
    if key not in _FIG_CACHE:
        t0 = time.perf_counter()
        text = run_figure(fig_id, workers=workers).to_csv()
        _FIG_CACHE[key] = (text, time.perf_counter() - t0)
        if REGEN and workers == 1:
            GOLDEN.mkdir(exist_ok=True)
            (GOLDEN / f"fig{fig_id}.csv").write_text(text)
    return _FIG_CACHE[key]
