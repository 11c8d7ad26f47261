import numpy as np
import pytest

from kolmo import nnet, reduction as red, spectral as sp, storage
from kolmo.errors import FormatError


def sample_series(count=4, seed=0):
    grid = sp.Grid()
    params = sp.FlowParams(re=13.5, n=2, dt=0.01)
    rng = np.random.default_rng(seed)
    snaps = rng.standard_normal((count, grid.nx, grid.ny))
    return sp.SnapshotSeries(snaps, grid, params, save_every=5.0)


class TestSnapshotContainer:
    def test_roundtrip_exact(self, tmp_path):
        ser = sample_series()
        path = str(tmp_path / "x.kf")
        storage.write_snapshots(path, ser)
        back = storage.read_snapshots(path)
        assert back.count == ser.count
        assert back.grid == ser.grid
        assert back.params == ser.params
        assert back.save_every == ser.save_every
        assert np.array_equal(back.snapshots, ser.snapshots)

    def test_bad_magic(self, tmp_path):
        path = str(tmp_path / "x.kf")
        storage.write_snapshots(path, sample_series())
        raw = bytearray(open(path, "rb").read())
        raw[:6] = b"NOTKFL"
        open(path, "wb").write(bytes(raw))
        with pytest.raises(FormatError):
            storage.read_snapshots(path)

    def test_bad_version(self, tmp_path):
        path = str(tmp_path / "x.kf")
        storage.write_snapshots(path, sample_series())
        raw = bytearray(open(path, "rb").read())
        raw[6] = 99  # little-endian u32 version field
        open(path, "wb").write(bytes(raw))
        with pytest.raises(FormatError):
            storage.read_snapshots(path)

    def test_truncated_payload(self, tmp_path):
        path = str(tmp_path / "x.kf")
        storage.write_snapshots(path, sample_series())
        raw = open(path, "rb").read()
        open(path, "wb").write(raw[:-16])
        with pytest.raises(FormatError):
            storage.read_snapshots(path)


class TestNetContainer:
    def test_roundtrip_bit_exact(self, tmp_path):
        net = nnet.init_net([4, 7, 2], ["sigmoid", "linear"], seed=3)
        path = str(tmp_path / "n.knet1")
        storage.write_net(path, net)
        back = storage.read_net(path)
        assert back.layer_dims == net.layer_dims
        assert back.activations == net.activations
        for a, b in zip(back.weights + back.biases, net.weights + net.biases):
            assert np.array_equal(a, b)

    def test_unknown_activation_code(self, tmp_path):
        net = nnet.init_net([2, 2], ["linear"], seed=0)
        path = str(tmp_path / "n.knet1")
        storage.write_net(path, net)
        raw = bytearray(open(path, "rb").read())
        raw[5 + 12 + 4] = 77  # activation byte of layer 0
        open(path, "wb").write(bytes(raw))
        with pytest.raises(FormatError):
            storage.read_net(path)


class TestPcaContainer:
    def test_roundtrip_orthogonality(self, tmp_path):
        rng = np.random.default_rng(1)
        data = rng.standard_normal((50, 12))
        basis = red.fit_pca(data)
        path = str(tmp_path / "p.bin")
        storage.write_pca(path, basis, scale=3.5)
        back, scale = storage.read_pca(path)
        assert scale == 3.5
        assert np.array_equal(back.u, basis.u)
        assert np.array_equal(back.singular_values, basis.singular_values)
        assert np.array_equal(back.mean, basis.mean)
        n = basis.u.shape[0]
        assert np.max(np.abs(back.u.T @ back.u - np.eye(n))) < 1e-12

    def test_uncentered_roundtrip(self, tmp_path):
        rng = np.random.default_rng(2)
        basis = red.fit_pca(rng.standard_normal((30, 8)), center=False)
        path = str(tmp_path / "p.bin")
        storage.write_pca(path, basis, scale=1.0)
        back, _ = storage.read_pca(path)
        assert back.mean is None


class TestCsv:
    def test_float_roundtrip_lossless(self, tmp_path):
        rng = np.random.default_rng(4)
        vals = rng.standard_normal(40) * 10.0 ** rng.integers(-8, 8, 40)
        path = str(tmp_path / "t.csv")
        storage.write_csv(path, ["a", "b"], [vals, np.arange(40)])
        header, cols = storage.read_csv(path)
        assert header == ["a", "b"]
        assert np.array_equal(cols["a"], vals)
        assert np.array_equal(cols["b"], np.arange(40.0))

    def test_atomic_write_leaves_no_partials(self, tmp_path):
        path = str(tmp_path / "sub" / "x.csv")
        storage.write_csv(path, ["v"], [[1.0]])
        leftovers = [p for p in (tmp_path / "sub").iterdir() if p.name.startswith(".tmp")]
        assert leftovers == []
