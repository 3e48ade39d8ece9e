import json

import pytest

from shadowlab import lft_core as lft
from shadowlab import shadowing_lab as lab
from shadowlab.errors import ConfigError, InvalidParameter
from shadowlab.family_catalog import FamilyCatalog, get_family_catalog, param_label, random_family_map


def test_catalog_covers_every_class():
    catalog = get_family_catalog()
    assert catalog.tags == list(lft.SYMBOL_CLASSES)
    assert len(catalog.rows()) == 21
    assert catalog is get_family_catalog()


def test_catalog_samples_match_their_family():
    catalog = get_family_catalog()
    for tag, params, phi in catalog.rows():
        assert lft.classify(phi).tag == tag
        assert lab.shadowing_verdict(phi) == catalog.expected_verdict(tag)


def test_param_label():
    assert param_label({'r': 0.5 + 0j}) == 'r=0.5'
    assert param_label({'c': 0.2 - 0.1j, 'a': 0.3 + 0.4j}) == 'a=0.3+0.4i;c=0.2-0.1i'


def test_unknown_family():
    with pytest.raises(InvalidParameter):
        get_family_catalog().get_family('XYZ')


def test_bad_catalog_file(tmp_path):
    missing = tmp_path / 'missing.json'
    with pytest.raises(ConfigError):
        FamilyCatalog(str(missing))

    unknown = tmp_path / 'unknown.json'
    unknown.write_text(json.dumps({'families': [{'tag': 'XYZ', 'samples': []}]}))
    with pytest.raises(ConfigError):
        FamilyCatalog(str(unknown))


@pytest.mark.parametrize('tag', lft.SYMBOL_CLASSES)
def test_random_draws_stay_in_family(tag, rng):
    catalog = get_family_catalog()
    for _ in range(20):
        phi, _ = random_family_map(tag, rng)
        assert lft.classify(phi).tag == tag
        assert lab.shadowing_verdict(phi) == catalog.expected_verdict(tag)
