"""Unit conversions shared by every module (SI internally)."""

import math

SPEED_OF_LIGHT = 299_792_458.0
BITS_PER_MB = 8e6


def mb_to_bits(mb):
    return mb * BITS_PER_MB


def bits_to_mb(bits):
    return bits / BITS_PER_MB


def dbm_per_hz_to_w_per_hz(dbm_hz):
    """-174 dBm/Hz -> 3.98e-21 W/Hz."""
    return 10.0 ** ((dbm_hz - 30.0) / 10.0)


def db_to_linear(db):
    return 10.0 ** (db / 10.0)


def linear_to_db(x):
    return 10.0 * math.log10(x)


def kmh_to_ms(v):
    return v / 3.6


def wavelength_m(carrier_hz):
    return SPEED_OF_LIGHT / carrier_hz
