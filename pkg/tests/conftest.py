import pytest

from synth_datasets import build_blob_dataset, build_husky_dataset
from vfseg.manifest import load_manifest

@pytest.fixture
def blob_manifest(tmp_path):
    return load_manifest(build_blob_dataset(tmp_path / "blobs"))


@pytest.fixture
def husky_manifest(tmp_path):
    return load_manifest(build_husky_dataset(tmp_path / "husky"))
