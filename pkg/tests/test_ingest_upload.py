import hashlib
import random

import pytest

from wildtrap.errors import (
    ChunkOverflowError,
    IncompleteUploadError,
    IntegrityError,
    OutOfOrderChunkError,
    UnknownSessionError,
    ValidationError,
)
from wildtrap.ingest import AlreadyStored, BlobStore, UploadManifest


def make_manifest(data: bytes, camera="cam-001", seq=0, **overrides):
    fields = dict(
        station_id="station-1",
        camera_id=camera,
        captured_at="2025-01-01T06:30:00Z",
        content_sha256=hashlib.sha256(data).hexdigest(),
        byte_length=len(data),
        modality="visual",
        sequence_no=seq,
    )
    fields.update(overrides)
    return UploadManifest(**fields)


@pytest.fixture
def store(tmp_path):
    return BlobStore(tmp_path / "blobs")


class TestManifestValidation:
    def test_zero_length_rejected(self):
        with pytest.raises(ValidationError):
            make_manifest(b"x", byte_length=0).validate()

    def test_bad_sha_rejected(self):
        with pytest.raises(ValidationError):
            make_manifest(b"x", content_sha256="ZZZ").validate()

    def test_bad_timestamp_rejected(self):
        with pytest.raises(ValidationError):
            make_manifest(b"x", captured_at="yesterday").validate()

    def test_bad_modality_rejected(self):
        with pytest.raises(ValidationError):
            make_manifest(b"x", modality="xray").validate()

    def test_from_dict_requires_all_fields(self):
        with pytest.raises(ValidationError, match="missing fields"):
            UploadManifest.from_dict({"station_id": "s"})


class TestUploadProtocol:
    def test_fresh_upload_starts_at_zero(self, store):
        data = b"a" * 1000
        session = store.begin_upload(make_manifest(data))
        assert session.resume_offset == 0
        assert store.append_chunk(session, 0, data) == 1000
        asset = store.finalize_upload(session)
        assert asset.sha256 == make_manifest(data).content_sha256
        assert store.get_bytes(asset.sha256) == data

    def test_dedupe_returns_already_stored(self, store):
        data = b"hello world"
        store.upload_bytes(make_manifest(data), data)
        outcome = store.begin_upload(make_manifest(data))
        assert isinstance(outcome, AlreadyStored)
        assert outcome.asset.byte_length == len(data)

    def test_partial_upload_resumes_at_received_bytes(self, store):
        data = bytes(range(256)) * 40  # 10240 bytes
        manifest = make_manifest(data)
        session = store.begin_upload(manifest)
        store.append_chunk(session, 0, data[:4096])
        resumed = store.begin_upload(manifest)
        assert not isinstance(resumed, AlreadyStored)
        assert resumed.resume_offset == 4096

    def test_out_of_order_append_rejected(self, store):
        data = b"b" * 2000
        session = store.begin_upload(make_manifest(data))
        with pytest.raises(OutOfOrderChunkError) as err:
            store.append_chunk(session, 500, data[500:])
        assert err.value.resume_offset == 0

    def test_append_past_declared_length_rejected(self, store):
        data = b"c" * 100
        session = store.begin_upload(make_manifest(data))
        with pytest.raises(ChunkOverflowError):
            store.append_chunk(session, 0, data + b"extra")

    def test_interleaved_sessions_have_independent_offsets(self, store):
        data_a, data_b = b"a" * 5000, b"b" * 3000
        sess_a = store.begin_upload(make_manifest(data_a, seq=1))
        sess_b = store.begin_upload(make_manifest(data_b, seq=2))
        assert store.append_chunk(sess_a, 0, data_a[:2000]) == 2000
        assert store.append_chunk(sess_b, 0, data_b[:1000]) == 1000
        assert store.append_chunk(sess_a, 2000, data_a[2000:]) == 5000
        assert store.append_chunk(sess_b, 1000, data_b[1000:]) == 3000
        assert store.finalize_upload(sess_a).byte_length == 5000
        assert store.finalize_upload(sess_b).byte_length == 3000

    def test_premature_finalize_rejected(self, store):
        data = b"d" * 10000
        session = store.begin_upload(make_manifest(data))
        store.append_chunk(session, 0, data[:9999])
        with pytest.raises(IncompleteUploadError):
            store.finalize_upload(session)

    def test_hash_mismatch_discards_partial_data(self, store):
        data = b"e" * 500
        manifest = make_manifest(data)
        session = store.begin_upload(manifest)
        store.append_chunk(session, 0, b"f" * 500)  # wrong content, right length
        with pytest.raises(IntegrityError):
            store.finalize_upload(session)
        assert not store.has(manifest.content_sha256)
        assert store.begin_upload(manifest).resume_offset == 0

    def test_finalize_then_begin_dedupes(self, store):
        data = b"g" * 64
        manifest = make_manifest(data)
        store.upload_bytes(manifest, data)
        assert isinstance(store.begin_upload(manifest), AlreadyStored)

    def test_unknown_session_id(self, store):
        with pytest.raises(UnknownSessionError):
            store.append_chunk("nope", 0, b"x")

    def test_blob_layout_and_sidecar(self, store):
        data = b"h" * 10
        manifest = make_manifest(data)
        store.upload_bytes(manifest, data)
        sha = manifest.content_sha256
        blob = store.root / sha[:2] / sha
        sidecar = store.root / sha[:2] / f"{sha}.manifest.json"
        assert blob.read_bytes() == data
        assert sidecar.exists()
        loaded = store.load_asset(sha)
        assert loaded.manifest == manifest


class TestUploadProperties:
    def test_resume_split_equals_single_shot(self, store):
        rng = random.Random(42)
        for trial in range(20):
            data = rng.randbytes(rng.randint(1, 5000))
            manifest = make_manifest(data, seq=trial)
            split = rng.randint(0, len(data))
            session = store.begin_upload(manifest)
            if split:
                store.append_chunk(session, 0, data[:split])
            resumed = store.begin_upload(manifest)
            assert resumed.resume_offset == split
            store.append_chunk(resumed, split, data[split:])
            asset = store.finalize_upload(resumed)
            assert store.get_bytes(asset.sha256) == data

    def test_dedupe_count_equals_distinct_hashes(self, store):
        rng = random.Random(7)
        payloads = [rng.randbytes(300) for _ in range(10)]
        uploads = payloads * 3
        rng.shuffle(uploads)
        for i, data in enumerate(uploads):
            store.upload_bytes(make_manifest(data, seq=i), data)
        distinct = {hashlib.sha256(p).hexdigest() for p in payloads}
        assert store.asset_count() == len(distinct)

    def test_corrupted_chunks_never_persist_mismatched_asset(self, store):
        rng = random.Random(99)
        for trial in range(30):
            data = rng.randbytes(rng.randint(10, 2000))
            manifest = make_manifest(data, seq=trial)
            corrupted = bytearray(data)
            corrupted[rng.randrange(len(data))] ^= 0xFF
            session = store.begin_upload(manifest)
            store.append_chunk(session, 0, bytes(corrupted))
            with pytest.raises(IntegrityError):
                store.finalize_upload(session)
        for asset in store.iter_assets():
            assert hashlib.sha256(store.get_bytes(asset.sha256)).hexdigest() == asset.sha256

    def test_restart_preserves_partial_and_finalized(self, tmp_path):
        root = tmp_path / "blobs"
        store = BlobStore(root)
        done = b"x" * 800
        store.upload_bytes(make_manifest(done, seq=1), done)
        partial = b"y" * 1200
        manifest = make_manifest(partial, seq=2)
        session = store.begin_upload(manifest)
        store.append_chunk(session, 0, partial[:700])

        reopened = BlobStore(root)  # as after a server restart
        assert isinstance(reopened.begin_upload(make_manifest(done, seq=1)), AlreadyStored)
        resumed = reopened.begin_upload(manifest)
        assert resumed.resume_offset == 700
        reopened.append_chunk(resumed, 700, partial[700:])
        assert reopened.finalize_upload(resumed).byte_length == 1200
