import pytest
from hypothesis import settings

from margintrack.dataset import synthesize_sequence, write_synthetic

# the sandbox CPU is slow and shared; wall-clock deadlines just flake here
settings.register_profile("pkg", deadline=None, max_examples=50)
settings.load_profile("pkg")


@pytest.fixture(scope="session")
def translate_dir(tmp_path_factory):
    """A short translate sequence materialized in the on-disk layout."""
    seq = synthesize_sequence("translate", seed=0, num_frames=12)
    out = tmp_path_factory.mktemp("seqs") / "translate"
    write_synthetic(seq, out)
    return out


@pytest.fixture(scope="session")
def dataset_root(tmp_path_factory):
    """Two short sequences under one root, for bench-style tests."""
    root = tmp_path_factory.mktemp("dataset")
    for kind, n in (("translate", 10), ("scale_ramp", 8)):
        write_synthetic(synthesize_sequence(kind, seed=0, num_frames=n),
                        root / kind)
    return root
