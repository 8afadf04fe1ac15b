import pytest

from multiqpm.materials import find_material
from multiqpm.qpm import PmProcess


@pytest.fixture(scope="session")
def ppln():
    return find_material("PPLN")


@pytest.fixture(scope="session")
def ppslt():
    return find_material("PPSLT")


@pytest.fixture(scope="session")
def ppktp():
    return find_material("PPKTP")


@pytest.fixture(scope="session")
def materials(ppln, ppslt, ppktp):
    return {"PPLN": ppln, "PPSLT": ppslt, "PPKTP": ppktp}


@pytest.fixture(scope="session")
def type2_m2(ppln):
    return PmProcess.from_notation(ppln, "o:e,o", 2)


@pytest.fixture(scope="session")
def type1_m3(ppln):
    return PmProcess.from_notation(ppln, "o:e,e", 3, geometry="noncollinear")
