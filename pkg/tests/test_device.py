import numpy as np
import pytest

from holosim.device import (
    ConfigError,
    computational_indices,
    hilbert_dim,
    load_lattice,
    serialize_lattice,
    subsystem,
    with_levels,
)

REFERENCE_PAIR = """
[qubit.A]
role = "target"
anharmonicity_MHz = 375.0
detuning_MHz = 245.0

[qubit.B]
role = "auxiliary"
anharmonicity_MHz = 350.0

[[coupling]]
a = "A"
b = "B"
g_MHz = 11.41
"""

FIVE_QUBIT = REFERENCE_PAIR + """
[qubit.C]
role = "target"
anharmonicity_MHz = 310.0
detuning_MHz = 230.0

[qubit.D]
role = "target"
anharmonicity_MHz = 340.0
detuning_MHz = 240.0

[qubit.E]
role = "target"
anharmonicity_MHz = 325.0
detuning_MHz = 235.0

[[coupling]]
a = "B"
b = "C"
g_MHz = 11.41

[[coupling]]
a = "B"
b = "E"
g_MHz = 11.41
"""


class TestLoad:
    def test_reference_pair_values(self):
        model = load_lattice(REFERENCE_PAIR)
        a = model.qubit("A")
        b = model.qubit("B")
        assert a.role == "target"
        assert a.anharmonicity == pytest.approx(2 * np.pi * 375e6)
        assert a.detuning == pytest.approx(2 * np.pi * 245e6)
        assert a.levels == 3
        assert b.role == "auxiliary"
        assert b.detuning == 0.0
        assert model.coupling("A", "B") == pytest.approx(2 * np.pi * 11.41e6)

    def test_bipartite_violation(self):
        bad = """
[qubit.A]
role = "target"
anharmonicity_MHz = 375.0
detuning_MHz = 245.0

[qubit.B]
role = "target"
anharmonicity_MHz = 350.0
detuning_MHz = 200.0

[[coupling]]
a = "A"
b = "B"
g_MHz = 11.41
"""
        with pytest.raises(ConfigError, match="target to an auxiliary"):
            load_lattice(bad)

    def test_duplicate_label(self):
        with pytest.raises(ConfigError):
            load_lattice(REFERENCE_PAIR + '\n[qubit.A]\nrole = "target"\nanharmonicity_MHz = 1.0\n')

    def test_parse_error_reported(self):
        with pytest.raises(ConfigError, match="parse error"):
            load_lattice("[qubit.A\nrole =")

    def test_missing_field(self):
        with pytest.raises(ConfigError, match="anharmonicity_MHz"):
            load_lattice('[qubit.A]\nrole = "target"\n')

    def test_unknown_field(self):
        with pytest.raises(ConfigError, match="unknown field"):
            load_lattice('[qubit.A]\nrole = "target"\nanharmonicity_MHz = 1.0\nfrequency_GHz = 5.0\n')

    def test_auxiliary_with_detuning_rejected(self):
        bad = REFERENCE_PAIR.replace('[qubit.B]\nrole = "auxiliary"', '[qubit.B]\ndetuning_MHz = 3.0\nrole = "auxiliary"')
        with pytest.raises(ConfigError, match="zero detuning"):
            load_lattice(bad)

    def test_roundtrip(self):
        model = load_lattice(FIVE_QUBIT)
        again = load_lattice(serialize_lattice(model))
        assert again == model


class TestSubsystem:
    def test_pair_selection(self):
        model = load_lattice(FIVE_QUBIT)
        pair = subsystem(model, ["A", "B"])
        assert pair.labels() == ("A", "B")
        assert len(pair.couplings) == 1
        assert hilbert_dim(pair) == 9

    def test_chain_selection_preserves_order(self):
        model = load_lattice(FIVE_QUBIT)
        chain = subsystem(model, ["A", "B", "E"])
        assert chain.labels() == ("A", "B", "E")
        assert len(chain.couplings) == 2
        assert hilbert_dim(chain) == 27

    def test_disconnected_selection(self):
        model = load_lattice(FIVE_QUBIT)
        with pytest.raises(ConfigError, match="not connected"):
            subsystem(model, ["A", "C"])

    def test_unknown_label(self):
        model = load_lattice(REFERENCE_PAIR)
        with pytest.raises(ConfigError, match="unknown qubit"):
            subsystem(model, ["A", "Z"])


class TestDerived:
    def test_hilbert_dim_two_level(self):
        model = with_levels(load_lattice(REFERENCE_PAIR), 2)
        assert hilbert_dim(model) == 4

    def test_computational_indices_pair(self):
        model = load_lattice(REFERENCE_PAIR)
        # target A in {0,1}, auxiliary B pinned to 0: |00> and |10>
        assert computational_indices(model) == [0, 3]

    def test_computational_indices_chain(self):
        model = subsystem(load_lattice(FIVE_QUBIT), ["A", "B", "C"])
        # |000>, |001>, |100>, |101> in row-major index 9i+3j+k
        assert computational_indices(model) == [0, 1, 9, 10]
