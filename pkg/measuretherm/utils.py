import os
import sys
import hashlib
import logging
import numpy as np

LOG_LEVEL_VARIABLE = "MEASURETHERM_LOG_LEVEL"

MASK64 = (1 << 64) - 1


def get_logger(name, level=None):
    """
    Returns a logger writing to stdout. When `level` is not given, the level is read from the environment variable
    MEASURETHERM_LOG_LEVEL (default INFO)
    :param name: Logger name, typically __name__
    :param level: Explicit logging level, which takes precedence over the environment
    :return: logging.Logger
    """
    if level is None:
        level = logging.getLevelName(os.environ.get(LOG_LEVEL_VARIABLE, "INFO").upper())
        if not isinstance(level, int):
            level = logging.INFO
    formatter = logging.Formatter("%(asctime)s %(levelname)s [%(name)s]: %(message)s", "%Y-%m-%d %H:%M:%S")
    logger = logging.getLogger(name)
    logger.setLevel(level=level)
    console_handler = logging.StreamHandler(sys.stdout)
    console_handler.setFormatter(formatter)
    if not logger.hasHandlers():
        logger.addHandler(console_handler)
    logger.propagate = False
    return logger


def set_log_level(level):
    """ Sets the level of every measuretherm logger, including loggers created later through get_logger """
    os.environ[LOG_LEVEL_VARIABLE] = logging.getLevelName(level)
    for name in list(logging.root.manager.loggerDict):
        if name.startswith("measuretherm"):
            logging.getLogger(name).setLevel(level)


def parse_float_list(text):
    """
    Parses a comma-separated list of real numbers, eg '0.25, 0.75'
    :return: list of float
    """
    return [float(token) for token in _split_list(text)]


def parse_int_list(text):
    return [int(token) for token in _split_list(text)]


def parse_complex_list(text):
    """
    Parses a comma-separated list of complex numbers written in Python notation, eg '0.6, 0.8j' or '0.5+0.5j'
    :return: list of complex
    """
    return [complex(token.replace(" ", "")) for token in _split_list(text)]


def format_number_list(values):
    """ Inverse of the parse_*_list functions; complex values with zero imaginary part are written as reals """
    tokens = []
    for value in values:
        if isinstance(value, complex):
            if value.imag == 0:
                tokens.append(repr(value.real))
            else:
                tokens.append(repr(value).strip("()"))
        else:
            tokens.append(repr(value))
    return ",".join(tokens)


def _split_list(text):
    text = text.strip()
    if text == "":
        return []
    return [token.strip() for token in text.split(",")]


def splitmix64(value):
    """ One step of the SplitMix64 generator; returns the mixed 64-bit output for the given 64-bit input """
    z = (value + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed, component):
    """
    Derives the seed of a named component from the master seed. The component name is folded into 64 bits through
    SHA-256, xor-ed into the master seed and mixed by one SplitMix64 step, so streams of different components are
    independent of each other and of the order in which components are added
    :param master_seed: Unsigned 64-bit master seed
    :param component: Component name (str) or index (int)
    :return: int
    """
    digest = hashlib.sha256(str(component).encode("ascii")).digest()
    folded = int.from_bytes(digest[:8], "little")
    return splitmix64((int(master_seed) & MASK64) ^ folded)


def make_rng(master_seed, component):
    return np.random.default_rng(derive_seed(master_seed, component))


def file_digest(file_path):
    sha = hashlib.sha256()
    with open(file_path, "rb") as in_file:
        for chunk in iter(lambda: in_file.read(65536), b""):
            sha.update(chunk)
    return sha.hexdigest()
