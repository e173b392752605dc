"""Type aliases and helper functions for finite windows of the integer lattice."""
import itertools
from typing import Iterable, Iterator, TypeAlias

from pyplancherel.core.errors import DomainError

# Type alias for a lattice site (a point of Z, Z_+ or {0..L}).
Site: TypeAlias = int

# Type alias for a finite window: strictly increasing tuple of sites.
Window: TypeAlias = tuple[Site, ...]


def window(sites: Iterable[Site]) -> Window:
    """Returns the sorted window built from 'sites', rejecting duplicates.

    E.g: window([3, 1, 2]) => (1, 2, 3).
    """
    sorted_sites = tuple(sorted(int(site) for site in sites))
    if any(a == b for a, b in zip(sorted_sites, sorted_sites[1:])):
        raise DomainError(f"window has duplicate sites: {sorted_sites}")
    return sorted_sites


def span(low: Site, high: Site) -> Window:
    """Returns the window {low, ..., high}.

    E.g: span(-1, 2) => (-1, 0, 1, 2).
    """
    if high < low:
        raise DomainError(f"empty span {low}..{high}")
    return tuple(range(low, high + 1))


def parse_window(text: str) -> Window:
    """Parses 'a..b' ranges and comma lists (which may mix both).

    E.g: parse_window("-3..-1,5") => (-3, -2, -1, 5).
    """
    sites: list[Site] = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            if ".." in chunk:
                low, high = chunk.split("..", 1)
                sites.extend(span(int(low), int(high)))
            else:
                sites.append(int(chunk))
        except ValueError as error:
            raise DomainError(f"invalid window chunk {chunk!r}") from error
    if not sites:
        raise DomainError(f"empty window {text!r}")
    return window(sites)


def shifted(window_: Window, offset: Site) -> Window:
    """Returns a copy of a window translated by 'offset'.

    E.g: shifted((-1, 0, 1), 10) => (9, 10, 11).
    """
    return tuple(site + offset for site in window_)


def pairs(window_: Window) -> Iterator[tuple[Site, Site]]:
    """Returns a generator over ordered pairs (x, y) with x <= y.

    E.g: pairs((0, 1)) => (0, 0), (0, 1), (1, 1).
    """
    return itertools.combinations_with_replacement(window_, 2)


def subsets(window_: Window) -> Iterator[tuple[Site, ...]]:
    """Returns a generator over all subsets of a window, by increasing size.

    E.g: subsets((0, 1)) => (), (0,), (1,), (0, 1).
    """
    return itertools.chain.from_iterable(
        itertools.combinations(window_, size) for size in range(len(window_) + 1)
    )


def format_sites(sites: Iterable[Site]) -> str:
    """Returns sites as a comma-separated list, in the order given.

    E.g: format_sites((5, 3, 1, 0)) => "5,3,1,0".
    """
    return ",".join(str(site) for site in sites)
