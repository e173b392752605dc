import pytest

from pyplancherel.core import lattice
from pyplancherel.core.errors import DomainError


def test_window_sorts_and_rejects_duplicates():
    assert lattice.window([3, 1, 2]) == (1, 2, 3)
    with pytest.raises(DomainError):
        lattice.window([1, 1])


def test_span():
    assert lattice.span(-1, 2) == (-1, 0, 1, 2)
    assert lattice.span(4, 4) == (4,)
    with pytest.raises(DomainError):
        lattice.span(2, 1)


@pytest.mark.parametrize(
    "text, expected",
    [
        ("0..3", (0, 1, 2, 3)),
        ("-3..-1,5", (-3, -2, -1, 5)),
        ("7, 2, 4", (2, 4, 7)),
        ("-2..1", (-2, -1, 0, 1)),
    ],
)
def test_parse_window(text, expected):
    assert lattice.parse_window(text) == expected


@pytest.mark.parametrize("text", ["", "a..b", "1..x", "3..1", "1,1"])
def test_parse_window_rejects(text):
    with pytest.raises(DomainError):
        lattice.parse_window(text)


def test_shifted_pairs_subsets():
    assert lattice.shifted((-1, 0, 1), 10) == (9, 10, 11)
    assert list(lattice.pairs((0, 1))) == [(0, 0), (0, 1), (1, 1)]
    assert list(lattice.subsets((0, 1))) == [(), (0,), (1,), (0, 1)]
    assert len(list(lattice.subsets(lattice.span(0, 4)))) == 32


def test_format_sites():
    assert lattice.format_sites((5, 3, 1, 0)) == "5,3,1,0"
    assert lattice.format_sites(()) == ""
