"""Centralized dB / dBm conversions.

Scenario files carry SI units (meters, radians, watts); decibel values
appear only at the CLI boundary and in output columns.
"""
import math


def db_to_linear(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


def linear_to_db(value: float) -> float:
    if value <= 0.0:
        raise ValueError(f"dB conversion needs a positive value, got {value}")
    return 10.0 * math.log10(value)


def dbm_to_watts(power_dbm: float) -> float:
    return 10.0 ** ((power_dbm - 30.0) / 10.0)


def watts_to_dbm(power_w: float) -> float:
    if power_w <= 0.0:
        raise ValueError(f"dBm conversion needs a positive power, got {power_w}")
    return 10.0 * math.log10(power_w) + 30.0
