"""
Individual-based simulation with per-strand mutations.

Every individual carries two strands, each a set of mutation ids (infinite
sites). Births pick an ordered pair of distinct parents uniformly at total
rate bN; the child takes one gamete from each parent, every locus assorting
independently. An individual dies at rate d0 + delta * (loci on one strand)
+ delta' * (loci on both strands) + c(N - 1); nobody dies at N = 2. Each
strand mutates at rate mu/K, creating a fresh locus.
"""

from typing import Optional

import numpy as np

from diploid_vortex.config.settings import get_settings
from diploid_vortex.exceptions import InvalidParametersError, PopulationCapExceeded
from diploid_vortex.logging import get_logger, timed_operation
from diploid_vortex.simulate.rng import RngStream
from diploid_vortex.types.enums import MicroEventKind
from diploid_vortex.types.results import MicroEvent, MicroRun

logger = get_logger(__name__)

Genome = tuple[frozenset[int], frozenset[int]]


class MicroPopulation:
    """Mutable population state for one microscopic run."""

    def __init__(self, size: int, d0: float, delta: float, delta_prime: float):
        self.d0 = d0
        self.delta = delta
        self.delta_prime = delta_prime
        empty: frozenset[int] = frozenset()
        self.genomes: list[Genome] = [(empty, empty) for _ in range(size)]
        self.loads: list[float] = [d0] * size
        self.copies: dict[int, int] = {}
        self.next_id = 0

    @property
    def size(self) -> int:
        return len(self.genomes)

    def load(self, genome: Genome) -> float:
        first, second = genome
        both = len(first & second)
        one = len(first ^ second)
        return self.d0 + self.delta * one + self.delta_prime * both

    def _count(self, genome: Genome, sign: int) -> None:
        for strand in genome:
            for locus in strand:
                if locus in self.copies:
                    self.copies[locus] += sign

    def add(self, genome: Genome) -> None:
        self.genomes.append(genome)
        self.loads.append(self.load(genome))
        self._count(genome, +1)

    def remove(self, index: int) -> None:
        genome = self.genomes[index]
        last = len(self.genomes) - 1
        self.genomes[index] = self.genomes[last]
        self.loads[index] = self.loads[last]
        self.genomes.pop()
        self.loads.pop()
        self._count(genome, -1)

    def mutate(self, index: int, strand: int) -> int:
        locus = self.next_id
        self.next_id += 1
        first, second = self.genomes[index]
        if strand == 0:
            first = first | {locus}
        else:
            second = second | {locus}
        genome = (first, second)
        self.genomes[index] = genome
        self.loads[index] = self.load(genome)
        self.copies[locus] = 1
        return locus

    def gamete(self, genome: Genome, rng: RngStream) -> frozenset[int]:
        first, second = genome
        chosen = set(first & second)
        for locus in sorted(first ^ second):
            if rng.uniform() < 0.5:
                chosen.add(locus)
        return frozenset(chosen)

    def settle(self) -> tuple[list[int], list[int]]:
        """Segregating loci that just reached 0 or 2N copies; both stop being tracked."""
        lost = [locus for locus, n in self.copies.items() if n == 0]
        fixed = [locus for locus, n in self.copies.items() if n == 2 * self.size]
        for locus in lost + fixed:
            del self.copies[locus]
        return lost, fixed


def _check(initial_size: int, b: float, d0: float, c: float, mu: float, k: float) -> None:
    if initial_size < 2:
        raise InvalidParametersError("initial size must be at least 2", {"size": initial_size})
    if not (b > 0 and c > 0 and d0 >= 0):
        raise InvalidParametersError("need b > 0, c > 0, d0 >= 0", {"b": b, "c": c, "d0": d0})
    if mu < 0 or k < 1:
        raise InvalidParametersError("need mu >= 0 and K >= 1", {"mu": mu, "K": k})


@timed_operation("simulate_microscopic")
def simulate_microscopic(
    initial_size: int,
    b: float,
    d0: float,
    c: float,
    delta: float,
    delta_prime: float,
    mu: float,
    k_scale: float,
    seed: int,
    t_end: float,
    stop_at_first_mutation: bool = False,
    size_cap: Optional[int] = None,
) -> MicroRun:
    """
    Run the individual-based model up to ``t_end``.

    Mutation, fixation and loss events are logged with the population size at
    that moment. ``occupancy`` accumulates the time spent at each size while
    no mutation segregates.
    """
    _check(initial_size, b, d0, c, mu, k_scale)
    if not t_end > 0:
        raise InvalidParametersError("t_end must be positive", {"t_end": t_end})
    cap = get_settings().simulation.micro_size_cap if size_cap is None else size_cap
    rng = RngStream(seed, 0)
    pop = MicroPopulation(initial_size, d0, delta, delta_prime)
    strand_rate = mu / k_scale

    time = 0.0
    events: list[MicroEvent] = []
    occupancy: dict[int, float] = {}
    monomorphic_time = 0.0
    first_mutation: Optional[float] = None
    fixations = losses = mutations = 0

    while True:
        size = pop.size
        birth = b * size
        death = 0.0 if size <= 2 else float(sum(pop.loads)) + c * size * (size - 1)
        mutation = 2.0 * size * strand_rate
        total = birth + death + mutation
        dt = rng.exponential(total)
        step_end = min(time + dt, t_end)
        if not pop.copies:
            occupancy[size] = occupancy.get(size, 0.0) + (step_end - time)
            monomorphic_time += step_end - time
        if time + dt >= t_end:
            time = t_end
            break
        time += dt

        channel = rng.categorical((birth, death, mutation), total)
        if channel == 0:
            i = rng.integer(size)
            j = rng.integer(size - 1)
            if j >= i:
                j += 1
            child = (pop.gamete(pop.genomes[i], rng), pop.gamete(pop.genomes[j], rng))
            pop.add(child)
            if pop.size > cap:
                raise PopulationCapExceeded(pop.size, cap, time)
        elif channel == 1:
            weights = np.asarray(pop.loads) + c * (size - 1)
            pop.remove(rng.categorical(weights.tolist(), float(weights.sum())))
        else:
            index = rng.integer(size)
            locus = pop.mutate(index, rng.integer(2))
            mutations += 1
            events.append(
                MicroEvent(time=time, kind=MicroEventKind.MUTATION, mutation_id=locus, size=size)
            )
            if first_mutation is None:
                first_mutation = time
                if stop_at_first_mutation:
                    break

        lost, fixed = pop.settle()
        for locus in lost:
            losses += 1
            events.append(
                MicroEvent(time=time, kind=MicroEventKind.LOSS, mutation_id=locus, size=pop.size)
            )
        for locus in fixed:
            fixations += 1
            events.append(
                MicroEvent(
                    time=time, kind=MicroEventKind.FIXATION, mutation_id=locus, size=pop.size
                )
            )

    logger.info(
        "Microscopic run",
        extra={
            "t_end": time,
            "mutations": mutations,
            "fixations": fixations,
            "losses": losses,
            "final_size": pop.size,
        },
    )
    return MicroRun(
        events=tuple(events),
        occupancy=occupancy,
        monomorphic_time=monomorphic_time,
        first_mutation_time=first_mutation,
        fixations=fixations,
        losses=losses,
        mutations=mutations,
        final_size=pop.size,
        t_end=time,
        seed=seed,
    )
