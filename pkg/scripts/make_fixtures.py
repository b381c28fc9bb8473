"""Write the bundled fixture corpus into src/timesym/fixtures.

Run from the repository root:  python scripts/make_fixtures.py
"""

from pathlib import Path

import numpy as np

from timesym import io as tio
from timesym import symmetry as sy
from timesym import tsqt
from timesym.operations import PAULIS, Instrument, discard_and_prepare

OUT = Path(__file__).resolve().parents[1] / "src" / "timesym" / "fixtures"


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    docs = {
        "identity.json": tio.kraus_channel_document([np.eye(2)], "identity"),
        "c0.json": tio.kraus_channel_document([p / 2 for p in PAULIS], "uniform-pauli",
                                              {"note": "sends every qubit state to I/2"}),
        "discard_prepare_0.json": tio.channel_document(discard_and_prepare([1, 0], 2), "discard-and-prepare-0"),
        "supermap_identity.json": tio.supermap_document(sy.identity_supermap(2, 2), "identity"),
        "supermap_double_transpose.json": tio.supermap_document(sy.double_transpose_supermap(2, 2),
                                                                "double-transpose"),
        "supermap_weak_adjoint.json": tio.supermap_document(sy.weak_adjoint_supermap(2, 2), "weak-adjoint"),
        "instrument_z.json": tio.instrument_document(tsqt.von_neumann_instrument(np.eye(2)), "von-neumann-z"),
        "instrument_luders_d3.json": tio.instrument_document(
            tsqt.luders_instrument([np.diag([1, 1, 0]), np.diag([0, 0, 1])]), "luders-d3"),
        "instrument_prepare_0.json": tio.instrument_document(
            Instrument((discard_and_prepare([1, 0], 2),)), "prepare-0"),
        "state_0.json": tio.state_document(np.diag([1, 0]), "zero"),
        "state_plus.json": tio.state_document(np.full((2, 2), 0.5), "plus"),
        "state_mixed.json": tio.state_document(np.eye(2) / 2, "maximally-mixed"),
        "state_d3.json": tio.state_document(np.diag([0.5, 0.3, 0.2]), "diagonal-d3"),
    }
    for name, doc in docs.items():
        tio.write_document(doc, OUT / name)
        print("wrote", OUT / name)


if __name__ == "__main__":
    main()
