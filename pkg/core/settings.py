import os

from dotenv import load_dotenv

from core.precision import MIN_PREC_BITS, PrecisionContext

load_dotenv()


def _int_setting(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise ValueError(
            f"The {name} environment variable must be an integer, got {raw!r}. "
            "Please check the .env file in the project root."
        )


DEFAULT_PREC_BITS = _int_setting("QUARTIC_LAB_PREC_BITS", 128)
MAX_PREC_BITS = _int_setting("QUARTIC_LAB_MAX_PREC_BITS", 1024)
LOG_LEVEL = os.getenv("QUARTIC_LAB_LOG_LEVEL", "INFO").strip().upper() or "INFO"

if DEFAULT_PREC_BITS < MIN_PREC_BITS or DEFAULT_PREC_BITS > MAX_PREC_BITS:
    raise ValueError(
        f"QUARTIC_LAB_PREC_BITS must lie between {MIN_PREC_BITS} and QUARTIC_LAB_MAX_PREC_BITS "
        f"({MAX_PREC_BITS}), got {DEFAULT_PREC_BITS}. "
        "Please ensure it is defined correctly in a .env file in the project root."
    )


def context_for_request(prec_bits: int | None = None) -> PrecisionContext:
    bits = DEFAULT_PREC_BITS if prec_bits is None else prec_bits
    if bits > MAX_PREC_BITS:
        raise ValueError(f"prec_bits {bits} exceeds the configured maximum of {MAX_PREC_BITS}")
    return PrecisionContext(bits)


def get_precision_context():
    ctx = PrecisionContext(DEFAULT_PREC_BITS)
    try:
        yield ctx
    finally:
        ctx.mp.prec = ctx.prec_bits
