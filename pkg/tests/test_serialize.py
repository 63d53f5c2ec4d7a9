import json

import numpy as np
import pytest

from qotpetz import serialize as ser
from qotpetz.coupling import channel_to_coupling
from qotpetz.errors import NotPSDError, NotTracePreservingError, ParameterError
from qotpetz.objects import (
    apply_channel,
    channel_on_support,
    random_channel,
    random_observables,
    random_state,
)


def _round(obj):
    return json.loads(ser.dumps(obj))


def test_matrix_round_trip_is_exact():
    rng = np.random.default_rng(0)
    m = rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))
    back = ser.matrix_from_json(_round(ser.matrix_to_json(m)))
    assert back.tobytes() == m.astype(np.complex128).tobytes()


def test_matrix_layout():
    obj = ser.matrix_to_json(np.array([[1, 2j], [3, 4]]))
    assert obj == {"rows": 2, "cols": 2, "entries": [[1.0, 0.0], [0.0, 2.0], [3.0, 0.0], [4.0, 0.0]]}


@pytest.mark.parametrize("bad", [
    {"rows": 2, "cols": 2, "entries": [[1, 0]]},
    {"rows": 1, "cols": 1, "entries": [["x", 0]]},
    {"rows": 1, "cols": 1, "entries": [[1, 0, 0]]},
    {"cols": 1, "entries": [[1, 0]]},
    [1, 2, 3],
])
def test_matrix_malformed(bad):
    with pytest.raises(ParameterError):
        ser.matrix_from_json(bad)


def test_state_round_trip_and_validation():
    rho = random_state(3, 2, 0)
    back = ser.state_from_json(_round(ser.state_to_json(rho)))
    np.testing.assert_array_equal(back.mat, rho.mat)
    bad = ser.state_to_json(rho)
    bad["dim"] = 4
    with pytest.raises(ParameterError):
        ser.state_from_json(bad)
    with pytest.raises(NotPSDError):
        ser.state_from_json({"mat": ser.matrix_to_json(np.diag([1.5, -0.5]))})
    with pytest.raises(ParameterError):
        ser.state_from_json({"dim": 2})


def test_channel_round_trip_with_embedding():
    rho = random_state(4, 2, 1)
    phi = channel_on_support(random_channel(4, 4, 3, 2), rho)
    back = ser.channel_from_json(_round(ser.channel_to_json(phi)))
    assert back.embedding is not None
    x = rho.mat
    np.testing.assert_allclose(apply_channel(back, x), apply_channel(phi, x), atol=1e-15)


def test_channel_rejects_non_tp():
    obj = {"din": 2, "dout": 2, "kraus": [ser.matrix_to_json(np.eye(2) / 2)]}
    with pytest.raises(NotTracePreservingError):
        ser.channel_from_json(obj)


def test_observables_and_coupling_round_trip():
    obs = random_observables(3, 2, 0)
    back = ser.observables_from_json(_round(ser.observables_to_json(obs)))
    assert all(np.array_equal(a, b) for a, b in zip(back, obs))
    pi = channel_to_coupling(random_channel(2, 2, 2, 0), random_state(2, 2, 0))
    obj = _round(ser.coupling_to_json(pi))
    assert set(obj) == {"d", "mat", "first_marginal", "second_marginal_T"}
    np.testing.assert_allclose(ser.coupling_from_json(obj).mat, pi.mat, atol=1e-15)


def test_dumps_is_deterministic_and_strict():
    obj = {"b": 1.0, "a": [0.1, 2]}
    assert ser.dumps(obj) == ser.dumps(dict(reversed(list(obj.items()))))
    assert ser.dumps(obj).endswith("\n")
    with pytest.raises(ValueError):
        ser.dumps({"x": float("nan")})
