"""Toy-scale training acceptance: 500 iterations over 64 synthetic pairs
with 32x32 crops must at least halve the total objective, and the exported
archive must carry exactly the engine's expected tensor names.

Requires the engine CLI (`cwnet`) for pair synthesis; takes several
minutes (marked slow)."""

from dataclasses import replace

import pytest

from cwnet_trainer import data
from cwnet_trainer.archive import write_archive, read_archive
from cwnet_trainer.config import parse_config
from cwnet_trainer.schema import tensor_names
from cwnet_trainer.train import train

pytestmark = pytest.mark.slow

TOY_CFG = "configs/toy.cfg"


@pytest.fixture(scope="module")
def toy_run(tmp_path_factory):
    if not data.engine_cli_available():
        pytest.skip("engine CLI `cwnet` not on PATH")
    cfg = parse_config(TOY_CFG)
    assert cfg.iterations == 500 and cfg.pairs == 64 and cfg.crop == 32
    pairs_dir = tmp_path_factory.mktemp("pairs")
    data.synth_pairs(cfg.pairs, pairs_dir, seed=cfg.seed, size=cfg.pair_size)
    pairs = data.load_pairs(pairs_dir)
    weights, history = train(cfg, pairs)
    return cfg, weights, history


def test_toy_training_halves_total_loss(toy_run):
    _, _, history = toy_run
    initial = history["initial"]["total"]
    final = history["final"]["total"]
    assert final <= 0.5 * initial, (
        f"total loss {initial:.4f} -> {final:.4f}, needs <= {0.5 * initial:.4f}")
    print(f"\nACCEPTANCE PASS: toy training halves the objective "
          f"({initial:.4f} -> {final:.4f})")


def test_l2_component_decreases(toy_run):
    _, _, history = toy_run
    assert history["final"]["l2"] < history["initial"]["l2"]


def test_exported_names_match_engine_contract(toy_run, tmp_path):
    cfg, weights, _ = toy_run
    assert set(weights) == set(tensor_names(cfg.network))
    path = tmp_path / "toy.cwt"
    write_archive(weights, path)
    assert set(read_archive(path)) == set(tensor_names(cfg.network))
