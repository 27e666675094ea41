"""Round-by-round state-vector simulation of the three qudit schemes.

* Scheme A: Alice prepares an EPR-like pair |Phi_[a],0,0>, applies L_lambda to
  the travelling half; Bob undoes it with L_lambda'^-1 and the pair is
  measured in the Bell basis. Raw-key symbols come from local B_1
  measurements of the post-measurement pair.
* Scheme B: Alice sends a B_lambda state, Bob measures in B_lambda'.
* Scheme C: as B, but Bob only tests one random pair of levels and discards
  the round when that test fails.

Rounds are simulated in fixed blocks of ``BLOCK_SIZE``; block k draws from
``numpy.random.default_rng([seed, k])`` and the error-estimation sample is
drawn from ``default_rng([seed, SAMPLE_STREAM])``. The transcript therefore
depends only on the configuration and seed, never on the worker count.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from functools import lru_cache
from dataclasses import asdict, dataclass, field as dc_field
from pathlib import Path
from typing import Iterable

import numpy as np

from . import __version__
from .channel import (ErrorSummary, PauliDistribution, e_a_from_coset_mismatch,
                      e_raw_from, sample_errors)
from .galois import coset_bits, field
from .qudit import (apply_X, apply_Z, b_lambda_basis, bell_basis, l_matrix, measure_bell,
                    measure_complete, measure_incomplete, measure_local, on_bob, x_matrix,
                    z_matrix)

BLOCK_SIZE = 10_000
SAMPLE_STREAM = 0xFFFF_FFFF
SCHEMES = ("A", "B", "C")


class ConfigError(ValueError):
    pass


class EstimationError(ValueError):
    pass


@dataclass(frozen=True)
class ProtocolConfig:
    scheme: str
    n: int
    rounds: int
    channel: PauliDistribution
    sample_fraction: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}, not {self.scheme!r}")
        if self.n not in (2, 3, 4):
            raise ConfigError(f"n must be 2, 3 or 4, not {self.n}")
        if not isinstance(self.rounds, (int, np.integer)) or self.rounds <= 0:
            raise ConfigError(f"rounds must be a positive integer, not {self.rounds!r}")
        if not 0.0 <= self.sample_fraction <= 1.0:
            raise ConfigError(f"sample_fraction {self.sample_fraction} outside [0, 1]")
        if self.channel.n != self.n:
            raise ConfigError(f"channel is defined for n={self.channel.n}, protocol uses n={self.n}")

    def header(self) -> dict:
        F = field(self.n)
        return {"version": __version__, "scheme": self.scheme, "n": self.n, "N": F.N,
                "modulus": F.modulus_str(), "rounds": int(self.rounds),
                "sample_fraction": self.sample_fraction, "seed": self.seed,
                "channel": self.channel.to_json()}


@dataclass
class RoundRecord:
    """One transmitted qudit. Labels are (coset representative, phase bit)."""

    scheme: str
    alice_lambda: int
    bob_lambda: int
    alice_label: tuple[int, int]
    bob_outcome: tuple[int, int] | None
    channel_error: tuple[int, int]
    sifted: bool
    sampled: bool = False
    bell: tuple[int, int, int] | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RoundRecord":
        tup = lambda x: None if x is None else tuple(x)  # noqa: E731
        return cls(d["scheme"], d["alice_lambda"], d["bob_lambda"], tup(d["alice_label"]),
                   tup(d["bob_outcome"]), tup(d["channel_error"]), d["sifted"],
                   d.get("sampled", False), tup(d.get("bell")))


@dataclass
class Transcript:
    config: ProtocolConfig
    rounds: list[RoundRecord] = dc_field(default_factory=list)

    @property
    def seed(self) -> int:
        return self.config.seed

    def sifted(self) -> list[RoundRecord]:
        return [r for r in self.rounds if r.sifted]

    def sampled(self) -> list[RoundRecord]:
        return [r for r in self.rounds if r.sampled]

    def key_rounds(self) -> list[RoundRecord]:
        return [r for r in self.rounds if r.sifted and not r.sampled]

    def lines(self) -> Iterable[str]:
        yield json.dumps({"header": self.config.header()})
        for r in self.rounds:
            yield json.dumps(r.to_dict())

    def write_jsonl(self, path) -> None:
        with open(path, "w") as fh:
            for line in self.lines():
                fh.write(line + "\n")

    @classmethod
    def read_jsonl(cls, path) -> "Transcript":
        with open(path) as fh:
            header = json.loads(fh.readline())["header"]
            rounds = [RoundRecord.from_dict(json.loads(line)) for line in fh if line.strip()]
        cfg = ProtocolConfig(header["scheme"], header["n"], header["rounds"],
                             PauliDistribution.from_json(header["channel"]),
                             header["sample_fraction"], header["seed"])
        return cls(cfg, rounds)


# ------------------------------------------------------------------ simulation


@lru_cache(maxsize=None)
def _bob_operator(F, lam: int, lam_bob: int, u: int, v: int) -> np.ndarray:
    """L_lam_bob^-1 X_u Z_v L_lam, the net map on the travelling qudit."""
    M = l_matrix(F, F.inv(lam_bob)) @ x_matrix(F, u) @ z_matrix(F, v) @ l_matrix(F, lam)
    M.setflags(write=False)
    return M


def _simulate_block(scheme: str, n: int, e: np.ndarray, seed: int, block: int,
                    count: int) -> list[RoundRecord]:
    F = field(n)
    N = F.N
    channel = PauliDistribution(F, e)
    rng = np.random.default_rng([seed, block])
    lam = rng.integers(1, N, size=count)
    a = 2 * rng.integers(0, N // 2, size=count)
    c = rng.integers(0, 2, size=count)
    lam_b = rng.integers(1, N, size=count)
    a_bob = 2 * rng.integers(0, N // 2, size=count) if scheme == "C" else None
    us, vs = sample_errors(channel, rng, count)

    records = []
    for k in range(count):
        la, lb, u, v = int(lam[k]), int(lam_b[k]), int(us[k]), int(vs[k])
        ak, ck = int(a[k]), int(c[k])
        bell = None
        if scheme == "A":
            state = bell_basis(F)[1][(ak >> 1) * 2 * N]
            bl, post = measure_bell(F, on_bob(_bob_operator(F, la, lb, u, v), state), rng)
            bell = (bl.a, bl.b, bl.c)
            al, post = measure_local(F, post, "A", 1, rng)
            bo, _ = measure_local(F, post, "B", 1, rng)
            alice, bob = (al.a, al.c), (bo.a, bo.c)
            sifted = la == lb
        else:
            _, rows = b_lambda_basis(F, la)
            state = apply_X(F, u, apply_Z(F, v, rows[(ak >> 1) * 2 + ck]))
            alice = (ak, ck)
            if scheme == "B":
                lab, _ = measure_complete(F, state, lb, rng)
                bob = (lab.a, lab.c)
                sifted = la == lb
            else:
                ab = int(a_bob[k])
                sign, _ = measure_incomplete(F, state, F.mul(lb, ab), F.mul(lb, ab ^ 1), rng)
                bob = None if sign is None else (ab, sign)
                sifted = la == lb and bob is not None
        records.append(RoundRecord(scheme, la, lb, alice, bob, (u, v), sifted, False, bell))
    return records


def run(cfg: ProtocolConfig, jobs: int = 1) -> Transcript:
    """Simulate ``cfg.rounds`` rounds and mark the error-estimation sample."""
    sizes = [min(BLOCK_SIZE, cfg.rounds - s) for s in range(0, cfg.rounds, BLOCK_SIZE)]
    args = [(cfg.scheme, cfg.n, np.asarray(cfg.channel.e), cfg.seed, k, size)
            for k, size in enumerate(sizes)]
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            blocks = list(pool.map(_simulate_block, *zip(*args)))
    else:
        blocks = [_simulate_block(*a) for a in args]
    rounds = [r for b in blocks for r in b]

    sifted_idx = [i for i, r in enumerate(rounds) if r.sifted]
    n_sample = int(round(cfg.sample_fraction * len(sifted_idx)))
    if n_sample:
        pick = np.random.default_rng([cfg.seed, SAMPLE_STREAM]).choice(
            len(sifted_idx), size=n_sample, replace=False)
        for i in pick:
            rounds[sifted_idx[i]].sampled = True
    return Transcript(cfg, rounds)


def _run_scheme(scheme: str, cfg: ProtocolConfig, jobs: int) -> Transcript:
    if cfg.scheme != scheme:
        raise ConfigError(f"config is for scheme {cfg.scheme}, not {scheme}")
    return run(cfg, jobs)


def run_scheme_a(cfg: ProtocolConfig, jobs: int = 1) -> Transcript:
    return _run_scheme("A", cfg, jobs)


def run_scheme_b(cfg: ProtocolConfig, jobs: int = 1) -> Transcript:
    return _run_scheme("B", cfg, jobs)


def run_scheme_c(cfg: ProtocolConfig, jobs: int = 1) -> Transcript:
    return _run_scheme("C", cfg, jobs)


# ------------------------------------------------------------------ post-processing


@dataclass
class RawKeys:
    n: int
    alice_bits: np.ndarray
    bob_bits: np.ndarray
    alice_dits: np.ndarray
    bob_dits: np.ndarray
    alice_phase: np.ndarray
    bob_phase: np.ndarray

    def __len__(self) -> int:
        return len(self.alice_bits)

    def bit_mismatches(self) -> int:
        return int(np.count_nonzero(self.alice_bits != self.bob_bits))

    def dit_mismatches(self) -> int:
        return int(np.count_nonzero(self.alice_dits != self.bob_dits))

    def phase_mismatches(self) -> int:
        return int(np.count_nonzero(self.alice_phase != self.bob_phase))

    @staticmethod
    def _hex(bits: np.ndarray) -> str:
        return np.packbits(bits.astype(np.uint8)).tobytes().hex()

    def to_hex(self) -> dict:
        return {"bits": len(self), "alice": self._hex(self.alice_bits),
                "bob": self._hex(self.bob_bits)}


def _encode(labels: list[tuple[int, int]], n: int) -> np.ndarray:
    return np.array([b for a, c in labels for b in (*coset_bits(a, n), c)], dtype=np.uint8)


def extract_keys(t: Transcript) -> RawKeys:
    """Raw keys from the sifted rounds not spent on error estimation.

    Each round contributes its (n-1) coset bits followed by the phase bit.
    """
    rows = t.key_rounds()
    alice = [r.alice_label for r in rows]
    bob = [r.bob_outcome for r in rows]
    n = t.config.n
    return RawKeys(
        n,
        _encode(alice, n), _encode(bob, n),
        np.array([a for a, _ in alice], dtype=np.int64), np.array([a for a, _ in bob], dtype=np.int64),
        np.array([c for _, c in alice], dtype=np.uint8), np.array([c for _, c in bob], dtype=np.uint8),
    )


def estimate_summary(t: Transcript) -> ErrorSummary:
    """Error rates from the revealed sample only."""
    sample = t.sampled()
    if not sample:
        raise EstimationError("transcript has no sampled rounds to estimate from")
    N = 1 << t.config.n
    m = len(sample)
    e_c = sum(r.alice_label[1] != r.bob_outcome[1] for r in sample) / m
    coset = sum(r.alice_label[0] != r.bob_outcome[0] for r in sample) / m
    e_a = e_a_from_coset_mismatch(coset, N)
    return ErrorSummary(e_c, e_a, e_raw_from(e_c, e_a, N))


def revealed_counts(t: Transcript) -> np.ndarray:
    """Counts of revealed (lambda, [b], c) in the sample, shaped like ObservedRates.table.

    Scheme A reveals the Bell label; Schemes B and C reveal the coset shift
    and phase flip between Alice's and Bob's symbols.
    """
    N = 1 << t.config.n
    counts = np.zeros((N - 1, N // 2, 2), dtype=np.int64)
    for r in t.sampled():
        if r.bell is not None:
            b, c = r.bell[1] & ~1, r.bell[2]
        else:
            b = r.alice_label[0] ^ r.bob_outcome[0]
            c = r.alice_label[1] ^ r.bob_outcome[1]
        counts[r.alice_lambda - 1, b >> 1, c] += 1
    return counts


def run_statistics(t: Transcript) -> dict:
    total = len(t.rounds)
    matched = sum(r.alice_lambda == r.bob_lambda for r in t.rounds)
    succeeded = sum(r.bob_outcome is not None for r in t.rounds)
    kept = sum(r.sifted for r in t.rounds)
    return {"rounds": total, "sift_rate": matched / total, "success_rate": succeeded / total,
            "keep_rate": kept / total, "sifted": kept, "sampled": len(t.sampled())}
