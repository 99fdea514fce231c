"""Instance generators, the space file format, JSON reports and the CLI."""

from .generators import gen_cycles, gen_margulis, gen_random_regular, gen_torus
from .spacefile import SpaceFile, dump, load, parse, serialize

__all__ = ["gen_cycles", "gen_torus", "gen_random_regular", "gen_margulis", "SpaceFile", "parse", "serialize", "load", "dump"]
