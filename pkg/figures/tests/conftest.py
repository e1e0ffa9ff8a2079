import pathlib

import pytest

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures():
    return FIXTURES


@pytest.fixture
def spec_dict(fixtures):
    def make(kind, csv_name, output="fig.png", **style):
        return {"kind": kind, "inputs": [str(fixtures / csv_name)],
                "output": output, "style": style}
    return make
