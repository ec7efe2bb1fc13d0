import numpy as np
import pytest

import vfseg
from vfseg_exporter.encoders import (
    StubImageEncoder,
    StubTagger,
    StubTextEncoder,
    get_image_encoder,
    get_text_encoder,
)
from vfseg_exporter.jobs import (
    export_image_embeddings,
    export_tags,
    export_text_embeddings,
)


def test_stub_text_encoder_unit_norm_and_deterministic():
    enc = StubTextEncoder(dim=16)
    a = enc.encode_text(["A photo of a dog", "A photo of a cat"])
    b = enc.encode_text(["A photo of a dog", "A photo of a cat"])
    assert a.shape == (2, 16)
    np.testing.assert_array_equal(a, b)
    np.testing.assert_allclose(
        np.linalg.norm(a.astype(np.float64), axis=1), 1.0, atol=1e-5
    )
    assert not np.array_equal(a[0], a[1])


def test_image_export_grid_dims(checker_image, tmp_path):
    out_dir = tmp_path / "out"
    written = export_image_embeddings(
        checker_image.parent, out_dir, StubImageEncoder(dim=8, patch=16)
    )
    assert [p.name for p in written] == ["checker.vfse"]
    loaded = vfseg.read_embedding(written[0])
    assert loaded.data.shape == (2, 2, 8)
    norms = np.linalg.norm(loaded.data.astype(np.float64), axis=-1)
    np.testing.assert_allclose(norms, 1.0, atol=1e-5)
    assert loaded.provenance == "stub-image-d8-p16"


def test_image_export_deterministic(checker_image, tmp_path):
    enc = StubImageEncoder(dim=8, patch=16)
    a = export_image_embeddings(checker_image.parent, tmp_path / "a", enc)
    b = export_image_embeddings(checker_image.parent, tmp_path / "b", enc)
    assert a[0].read_bytes() == b[0].read_bytes()


def test_image_smaller_than_patch_rejected():
    with pytest.raises(ValueError):
        StubImageEncoder(dim=4, patch=16).encode_image(
            np.zeros((8, 8, 3), dtype=np.uint8)
        )


def test_text_export_adjective_mean_provenance(tmp_path):
    out = tmp_path / "bank.vfse"
    export_text_embeddings(
        ["giraffe", "tree"],
        out,
        StubTextEncoder(dim=16),
        adjectives={"giraffe": ["tall", "spotted"]},
    )
    loaded = vfseg.read_embedding(out)
    assert loaded.provenance == "stub-text-d16+adjective-mean"
    np.testing.assert_allclose(
        np.linalg.norm(loaded.data.astype(np.float64), axis=1), 1.0, atol=1e-5
    )


def test_adjective_mean_matches_hand_computation(tmp_path):
    enc = StubTextEncoder(dim=16)
    out = tmp_path / "bank.vfse"
    export_text_embeddings(["giraffe"], out, enc, adjectives={"giraffe": ["tall", "green"]})
    vecs = enc.encode_text(
        ["A photo of a tall giraffe", "A photo of a green giraffe"]
    ).astype(np.float64)
    vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
    mean = vecs.mean(axis=0)
    expected = (mean / np.linalg.norm(mean)).astype(np.float32)
    loaded = vfseg.read_embedding(out)
    np.testing.assert_array_equal(loaded.data[0], expected)


def test_empty_name_list_rejected(tmp_path):
    with pytest.raises(ValueError):
        export_text_embeddings([], tmp_path / "x.vfse", StubTextEncoder())


def test_tag_export_dedupes_and_continues_on_failure(checker_image, tmp_path):
    from PIL import Image

    second = checker_image.parent / "plain.png"
    Image.fromarray(np.full((16, 16, 3), 9, dtype=np.uint8)).save(second)
    # only "checker" has tags configured; "plain" must fail without aborting
    tagger = StubTagger({"checker": ["dog", "tree", "dog", "sky", "tree"]})
    out = tmp_path / "tags.json"
    result = export_tags(checker_image.parent, out, tagger)
    assert result.tags == {"checker": ["dog", "tree", "sky"]}
    assert list(result.failures) == ["plain"]
    assert vfseg.load_tags(out) == {"checker": ["dog", "tree", "sky"]}


def test_encoder_factories():
    assert isinstance(get_text_encoder("stub", dim=4), StubTextEncoder)
    assert isinstance(get_image_encoder("stub", dim=4, patch=8), StubImageEncoder)
    with pytest.raises(ValueError):
        get_text_encoder("nope")
    with pytest.raises(ValueError):
        get_image_encoder("nope")
