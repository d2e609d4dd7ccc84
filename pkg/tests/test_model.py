import pytest

from treedb import (
    ConfigError,
    SyntheticSpec,
    cross_product,
    generate_synthetic,
    identical_slots,
    symmetric_blocks,
    uniform_slots,
)


class TestGenerators:
    def test_identical_small(self):
        model = identical_slots(3, 2)
        assert set(model.initial_states) == {(1, 1), (2, 2), (3, 3)}
        assert model.next_state((1, 1)) == ()

    def test_cross_small(self):
        model = cross_product(2, 2)
        assert set(model.initial_states) == {
            (1, 2, 1, 2), (1, 2, 3, 4), (3, 4, 1, 2), (3, 4, 3, 4)
        }
        assert model.k == 4

    def test_uniform_small(self):
        model = uniform_slots(2, 2)
        assert set(model.initial_states) == {(1, 1), (1, 2), (2, 1), (2, 2)}

    def test_cardinalities(self):
        assert len(identical_slots(50, 6).initial_states) == 50
        assert len(cross_product(7, 3).initial_states) == 49
        assert len(uniform_slots(3, 4).initial_states) == 3**4
        assert len(symmetric_blocks(5, 3, 2).initial_states) == 5**3

    def test_vectors_have_declared_length_and_domain(self):
        for model in (identical_slots(20, 5), cross_product(4, 3),
                      uniform_slots(2, 8), symmetric_blocks(4, 2, 3)):
            for v in model.initial_states:
                assert len(v) == model.k
                assert all(0 <= s < 2**32 - 1 for s in v)

    def test_symmetric_layout_shares_groups(self):
        model = symmetric_blocks(4, 3, 2)
        assert model.process_layout == (2, 2, 2)
        assert model.layout_groups == (0, 0, 0)

    def test_parameter_validation(self):
        with pytest.raises(ConfigError):
            identical_slots(0, 4)
        with pytest.raises(ConfigError):
            uniform_slots(2, 3)  # k not a power of two
        with pytest.raises(ConfigError):
            uniform_slots(10, 32)  # blows the enumeration budget


class TestSpecParsing:
    def test_parse_and_generate(self):
        model = generate_synthetic(SyntheticSpec.parse("identical:n=100,k=8"))
        assert len(model.initial_states) == 100 and model.k == 8

    def test_cross_accepts_k_or_j(self):
        by_k = generate_synthetic(SyntheticSpec.parse("cross:m=3,k=6"))
        by_j = generate_synthetic(SyntheticSpec.parse("cross:m=3,j=3"))
        assert by_k.initial_states == by_j.initial_states

    def test_blocks_parameter_attaches_layout(self):
        model = generate_synthetic(SyntheticSpec.parse("identical:n=10,k=8,blocks=2"))
        assert model.process_layout == (4, 4)

    def test_bad_specs(self):
        for text in ("nope:n=1", "identical:n=5", "identical:n=x,k=2", "cross:m=4"):
            with pytest.raises(ConfigError):
                SyntheticSpec.parse(text)
        with pytest.raises(ConfigError):
            generate_synthetic(SyntheticSpec.parse("cross:m=4,k=7"))
        with pytest.raises(ConfigError):
            generate_synthetic(SyntheticSpec.parse("identical:n=10,k=8,blocks=3"))
