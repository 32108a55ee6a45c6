"""Collection of tests focused on the base module."""

import json

import numpy as np
import pytest

from ahres.base import (AhresError, BranchError, ConfigError, DomainError, IntegrationError, NearPoleError,
                        NumericalError)


class TestHierarchy:
    """All errors derive from the package root and a standard exception."""

    @pytest.mark.parametrize("cls, std", [(DomainError, ValueError), (ConfigError, ValueError),
                                          (BranchError, ArithmeticError), (NumericalError, ArithmeticError),
                                          (NearPoleError, ArithmeticError)])
    def test_bases(self, cls, std):
        assert issubclass(cls, AhresError)
        assert issubclass(cls, std)

    def test_near_pole_is_numerical(self):
        assert issubclass(NearPoleError, NumericalError)
        assert issubclass(IntegrationError, NumericalError)


class TestToDict:
    def test_plain(self):
        err = AhresError("boom", {"a": 1})

        out = err.to_dict()

        assert out == {"error": "AhresError", "message": "boom", "details": {"a": 1}}
        json.dumps(out)

    def test_config_pointer(self):
        err = ConfigError("bad key", "/absorbtion")

        assert err.pointer == "/absorbtion"
        assert err.to_dict()["details"]["pointer"] == "/absorbtion"

    def test_near_pole_rcond(self):
        err = NearPoleError("singular", 1e-17)

        assert err.to_dict()["details"]["rcond"] == 1e-17

    def test_integration_last_state(self):
        err = IntegrationError("failed", np.array([0.1, 0.0, 1.0, 0.5]))

        assert err.to_dict()["details"]["last_state"] == [0.1, 0.0, 1.0, 0.5]
        assert err.last_state.shape == (4,)
