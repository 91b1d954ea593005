"""
Batch cross-checks of the equivalence between joint majorization, the
kernel LP, the convex-function battery, the 1-D potential test and the
kernel-built doubly stochastic map.
"""
import logging
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from jointmaj.config import settings
from jointmaj.core.speclin import CommutingFamily, joint_spectral_measure, pinch
from jointmaj.core.transport import (
    convex_battery_measures,
    decide_majorization,
    ds_map_from_kernel,
    potential_oracle_1d,
)
from jointmaj.schemas.matrix_schema import FamilySchema
from jointmaj.schemas.report_schema import SuiteSummary, VerificationRecord, VerificationReport
from jointmaj.utils.digest import digest
from jointmaj.utils.random_instances import (
    family_from_spectrum,
    random_ds_matrix,
    random_eigentuples,
    random_partition,
    random_unitary,
)
from jointmaj.utils.rng import generator_info, make_rng

logger = logging.getLogger(__name__)

KINDS = ("pinched", "mixed", "perturbed", "random")

# T(b_i) = a_i must hold this tightly for a feasible pair
ROUNDTRIP_TOL = 1e-7


def make_instance(index: int, seed: int, dmax: int, nmax: int) -> tuple[str, CommutingFamily, CommutingFamily]:
    """
    Instance ``index`` of a campaign; the kind cycles through KINDS.
    pinched: a = conditional expectation of b; mixed: eigenvalues of a are a
    doubly stochastic mix of those of b; perturbed: spectrum of b spread by
    1.3 about its mean; random: independent spectrum with equal traces.
    """
    rng = make_rng(seed, index)
    kind = KINDS[index % len(KINDS)]
    n = int(rng.integers(1, nmax + 1))
    d = int(rng.integers(2, dmax + 1))
    lam = random_eigentuples(n, d, rng)
    famB = family_from_spectrum(random_unitary(d, rng), lam)
    mean = lam.mean(axis=0)

    if kind == "pinched":
        famA = pinch(famB, random_partition(d, rng))
    elif kind == "mixed":
        famA = family_from_spectrum(random_unitary(d, rng), random_ds_matrix(d, rng) @ lam)
    elif kind == "perturbed":
        famA = family_from_spectrum(random_unitary(d, rng), mean + 1.3 * (lam - mean))
    else:
        other = random_eigentuples(n, d, rng)
        famA = family_from_spectrum(random_unitary(d, rng), other + (mean - other.mean(axis=0)))
    return kind, famA, famB


def _family_digest(famA: CommutingFamily, famB: CommutingFamily) -> str:
    def parts(fam):
        return [[m.data.real, m.data.imag] for m in fam.members]

    return digest({"a": parts(famA), "b": parts(famB)})


def verify_pair(
    famA: CommutingFamily,
    famB: CommutingFamily,
    kind: str = "given",
    battery: int = 128,
    seed: int | None = None,
    timings: bool = False,
) -> VerificationRecord:
    seed = settings.SEED if seed is None else seed
    started = time.perf_counter()
    mu = joint_spectral_measure(famA, seed)
    nu = joint_spectral_measure(famB, seed)

    result = decide_majorization(mu, nu)
    battery_pass = convex_battery_measures(mu, nu, battery, seed)
    oracle = potential_oracle_1d(mu, nu) if famA.n == 1 else None

    roundtrip = None
    if result.feasible:
        T = ds_map_from_kernel(result.witness, famA, famB, seed)
        roundtrip = max(float(np.max(np.abs(T(b) - a.data))) for a, b in zip(famA.members, famB.members))

    agreement = True
    if result.feasible and (not battery_pass or roundtrip > ROUNDTRIP_TOL):
        agreement = False
    if oracle is not None and oracle != result.feasible:
        agreement = False

    if not agreement:
        status = "disagreement"
    elif not result.feasible and battery_pass:
        status = "battery_incomplete"
    else:
        status = "ok"
    if status != "ok":
        logger.warning("%s instance flagged: %s", kind, status)

    full = status != "ok"
    return VerificationRecord(
        digest=_family_digest(famA, famB),
        kind=kind,
        n=famA.n,
        d=famA.d,
        lp_feasible=result.feasible,
        battery_pass=battery_pass,
        oracle_1d=oracle,
        roundtrip_residual=roundtrip,
        agreement=agreement,
        status=status,
        seconds=time.perf_counter() - started if timings else None,
        famA=FamilySchema.from_domain(famA).model_dump() if full else None,
        famB=FamilySchema.from_domain(famB).model_dump() if full else None,
    )


def run_suite(
    count: int,
    dmax: int,
    nmax: int,
    seed: int | None = None,
    battery: int = 128,
    workers: int = 1,
    timings: bool = False,
    injected: list[tuple[CommutingFamily, CommutingFamily]] = (),
) -> VerificationReport:
    """Random campaign plus injected pairs; records sorted by input digest."""
    seed = settings.SEED if seed is None else seed

    def one(index: int) -> VerificationRecord:
        kind, famA, famB = make_instance(index, seed, dmax, nmax)
        return verify_pair(famA, famB, kind, battery, seed, timings)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(one, range(count)))
    else:
        records = [one(i) for i in range(count)]
    records += [verify_pair(a, b, "injected", battery, seed, timings) for a, b in injected]
    records.sort(key=lambda rec: (rec.digest, rec.kind))

    summary = SuiteSummary(
        instances=len(records),
        feasible=sum(r.lp_feasible for r in records),
        disagreements=sum(r.status == "disagreement" for r in records),
        battery_incomplete=sum(r.status == "battery_incomplete" for r in records),
    )
    logger.info("suite: %s", summary.model_dump())
    return VerificationReport(
        tool=settings.PROJECT_NAME,
        version=settings.VERSION,
        generator=generator_info(seed),
        parameters={"count": count, "dmax": dmax, "nmax": nmax, "battery": battery},
        summary=summary,
        records=records,
    )
