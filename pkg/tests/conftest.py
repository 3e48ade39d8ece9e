import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from shadowlab import lft_core as lft  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def out_dir(tmp_path, monkeypatch):
    target = tmp_path / 'out'
    monkeypatch.setenv('SHADOWLAB_OUT_DIR', str(target))
    return target


@pytest.fixture
def canonical_symbols():
    return {
        lft.EA: lft.canonical_ea(1j),
        lft.HA: lft.canonical_ha(0.5),
        lft.HNA_I: lft.canonical_hna1(0.5),
        lft.HNA_II: lft.canonical_hna2(0.5),
        lft.LOX: lft.canonical_lox(0.5, 0.25),
        lft.PA: lft.canonical_parabolic(2j),
        lft.PNA: lft.canonical_parabolic(2),
    }


def random_automorphism(rng):
    u = 0.8 * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
    lam = np.exp(2j * np.pi * rng.uniform())
    return lft.disk_automorphism(u, lam)
