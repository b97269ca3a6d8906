"""Python access to the hwut core: parsing, simulation, mutation, metrics and
the mock-driven evaluation loops."""

from ._hwut import (  # noqa: F401
    Design,
    HwutError,
    __version__,
    attack_rate,
    bin,
    bin_index,
    data_dir,
    divergent_attack,
    evaluate,
    report,
)
