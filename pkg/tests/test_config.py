import pytest

from hfrac.config import Config, load_config, parse_config


def test_defaults():
    c = Config()
    assert c.grid_counts == (24, 24, 128)
    assert c.vhp_triples()[0] == (2.0, 2.0, 0.5)
    assert c.as_dict()["thr_drift"] == 0.2


def test_parse_types_and_comments():
    c = parse_config("""
# a comment
seed = 7
grid_counts = 8, 8, 32   # inline
embed_p = 2
thr_drift = 0.3
embed_baseline = /tmp/b.json
vhp_cases = 2:2:0.5
""")
    assert c.seed == 7 and isinstance(c.seed, int)
    assert c.grid_counts == (8, 8, 32)
    assert c.embed_p == (2.0,)
    assert c.thr_drift == 0.3
    assert c.embed_baseline == "/tmp/b.json"
    assert c.vhp_triples() == [(2.0, 2.0, 0.5)]


def test_unknown_key_rejected():
    with pytest.raises(ValueError):
        parse_config("grid_count = 8,8,32")


def test_base_and_file(tmp_path):
    base = parse_config("seed = 3")
    c = parse_config("n = 1", base)
    assert c.seed == 3
    p = tmp_path / "c.cfg"
    p.write_text("trunc_counts = 8, 8, 64\n")
    assert load_config(p).trunc_counts == (8, 8, 64)
