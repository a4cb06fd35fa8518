"""
Named reproduction recipes for `twin repro`.

Each recipe is a self-contained check of one end-to-end property of the
toolchain. A recipe takes the run seed and returns (passed, detail).
"""
import itertools
import json
import math
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from dsp import (
    ChannelFrame,
    CorrelationMode,
    EmulatorConfig,
    IqWaveform,
    SounderConfig,
    TapSet,
    correlate,
    emulate,
    generate_glfsr,
    generate_golay,
    golay_pair,
    load_iq_file,
    modulate_bpsk,
    save_iq_file,
)
from dsp.sequences import CorrelationKind, cross_correlation
from planning import LinkGainMatrix, plan_exhaustive, sinr
from scenario import (
    MultipathComponent,
    MultipathProfile,
    approximate,
    campaign_heatmap,
    cross_correlation_profile,
    decode_frame,
    encode_frame,
    measure_base_loss,
    scenario_from_dict,
    scenario_to_dict,
    similarity,
    single_frame_scenario,
)
from utils.errors import TwinError
from utils.ui import console, make_table

from .common import sound_link

RecipeFn = Callable[[int], Tuple[bool, str]]

FOUR_TAP_DB = {0: -3.0, 128: -20.0, 200: -15.0, 400: -8.0}
BASE_LOSS_DB = 57.55
SOUNDING_RATE = 50e6


@dataclass
class Recipe:
    name: str
    description: str
    fn: RecipeFn


RECIPES: Dict[str, Recipe] = {}


def recipe(name: str, description: str):
    """Register a recipe under ``name``."""
    def wrap(fn: RecipeFn) -> RecipeFn:
        RECIPES[name] = Recipe(name, description, fn)
        return fn
    return wrap


def four_tap_scenario():
    return single_frame_scenario({(0, 1): TapSet.from_db(FOUR_TAP_DB)}, labels=["tx", "rx"])


# ----------------------------------------------------------------------------
# Sequences and sounding
# ----------------------------------------------------------------------------

def _peak_lags(code, rate: float, repetitions: int) -> np.ndarray:
    wave = modulate_bpsk(code, rate, repetitions=repetitions)
    cir = correlate(wave, code, mode=CorrelationMode.LINEAR)
    mag = cir.magnitude
    return np.flatnonzero(mag >= mag.max() - 1e-9)


@recipe("peak-spacing", "GLFSR-255 and Golay-128 loop-back peaks at N-sample spacing")
def peak_spacing(seed: int) -> Tuple[bool, str]:
    details = []
    ok = True
    for code in (generate_glfsr(8), generate_golay(128, "A")):
        lags = _peak_lags(code, 1e6, 3)
        spacing = set(np.diff(lags).tolist())
        ok &= len(lags) == 3 and spacing == {code.length}
        details.append(f"{code.family.value}-{code.length}: peaks {lags.tolist()}")
    return ok, "; ".join(details)


@recipe("m-sequence", "GLFSR degree 8 periodic autocorrelation is {255, -1}")
def m_sequence(seed: int) -> Tuple[bool, str]:
    chips = generate_glfsr(8).chips.astype(np.int64)
    brute = np.array([int(np.sum(chips * np.roll(chips, -k))) for k in range(chips.size)])
    values = sorted(set(brute.tolist()))
    return brute[0] == 255 and values == [-1, 255], f"values {values}"


@recipe("golay", "Ga128/Gb128 aperiodic autocorrelations sum to 256 at lag 0 and 0 elsewhere")
def golay(seed: int) -> Tuple[bool, str]:
    a, b = golay_pair(128)
    total = (cross_correlation(a, a, CorrelationKind.APERIODIC)
             + cross_correlation(b, b, CorrelationKind.APERIODIC))
    ok = total[0] == 256 and not np.any(total[1:])
    return ok, f"lag 0 = {int(total[0])}, max |sidelobe| = {int(np.max(np.abs(total[1:])))}"


def _four_tap_round_trip(seed: int, noise: bool, frames: int):
    scenario = four_tap_scenario()
    config = SounderConfig(min_separation=1)
    return sound_link(scenario, (0, 1), generate_glfsr(8), SOUNDING_RATE, frames, noise=noise,
                      base_loss_db=BASE_LOSS_DB, seed=seed, config=config).report


@recipe("four-tap", "4-tap scenario: exact ToAs, gains within 1e-6 dB (clean) / 0.5 dB (AWGN)")
def four_tap(seed: int) -> Tuple[bool, str]:
    worst = {}
    ok = True
    for noise, tolerance in ((False, 1e-6), (True, 0.5)):
        report = _four_tap_round_trip(seed, noise, 1500)
        found = {t.grid_index: t for t in report.tracks}
        if sorted(found) != sorted(FOUR_TAP_DB):
            return False, f"noise={'on' if noise else 'off'}: taps at {sorted(found)}"
        errors = []
        for index, gain_db in FOUR_TAP_DB.items():
            track = found[index]
            errors += [abs(g + BASE_LOSS_DB - gain_db) for g in track.gains_db]
        worst[noise] = max(errors)
        ok &= worst[noise] < tolerance
    return ok, f"max gain error {worst[False]:.2e} dB clean, {worst[True]:.3f} dB with AWGN"


@recipe("noise-asymmetry", "Under AWGN the weakest tap's gain std exceeds the strongest tap's (5 seeds)")
def noise_asymmetry(seed: int) -> Tuple[bool, str]:
    ratios = []
    for k in range(5):
        report = _four_tap_round_trip(seed + k, True, 1500)
        stds = {t.grid_index: t.std_gain_db for t in report.tracks}
        if 128 not in stds or 0 not in stds:
            return False, f"seed {seed + k}: taps at {sorted(stds)}"
        ratios.append((stds[128], stds[0]))
    ok = all(weak > strong for weak, strong in ratios)
    return ok, ", ".join(f"{w:.4f}>{s:.4f}" for w, s in ratios)


@recipe("base-loss", "Sounding a 0 dB scenario measures the emulator base loss")
def base_loss(seed: int) -> Tuple[bool, str]:
    links = {(tx, rx): TapSet.identity() for tx in range(3) for rx in range(3) if tx != rx}
    scenario = single_frame_scenario(links)
    reports = {link: sound_link(scenario, link, generate_glfsr(8), SOUNDING_RATE, 200,
                                base_loss_db=BASE_LOSS_DB, seed=seed + n,
                                config=SounderConfig(min_separation=1)).report
               for n, link in enumerate(sorted(links))}
    mean, std = measure_base_loss(campaign_heatmap(reports))
    return abs(mean - BASE_LOSS_DB) < 0.1, f"mean {mean:.3f} dB, std {std:.4f} dB"


# ----------------------------------------------------------------------------
# Emulation and approximation
# ----------------------------------------------------------------------------

@recipe("superposition", "Two-transmitter emulation equals the sum of single-transmitter runs")
def superposition(seed: int) -> Tuple[bool, str]:
    rng = np.random.Generator(np.random.PCG64(seed))
    rate = 100e6
    n = 4096
    x = {tx: IqWaveform(rng.standard_normal(n) + 1j * rng.standard_normal(n), rate)
         for tx in (0, 1)}
    frame = ChannelFrame(0, {
        (0, 2): TapSet.from_db({0: 0.0, 37: -6.0, 300: -12.0}, {37: 1.0}),
        (1, 2): TapSet.from_db({5: -3.0, 90: -9.0, 511: -20.0}, {5: -0.5}),
    })
    config = EmulatorConfig(sample_rate=rate, base_loss_db=0.0, noise_enabled=False)
    both = emulate(x, frame, config, receivers=[2])[2].samples
    single = sum(emulate({tx: x[tx]}, frame, config, receivers=[2])[2].samples for tx in (0, 1))
    error = float(np.max(np.abs(both - single)) / np.max(np.abs(both)))
    return error < 1e-9, f"max relative error {error:.2e}"


def _cell_atoms(profile: MultipathProfile) -> np.ndarray:
    toas = profile.toas
    cells = np.floor((toas - toas.min()) / 10e-9 + 0.5).astype(int)
    return np.array([profile.gains[cells == c].sum() for c in np.unique(cells)])


def contiguous_oracle(profile: MultipathProfile, max_taps: int = 4) -> float:
    """Best coherent power over every split of the delay-ordered cells into k runs."""
    atoms = _cell_atoms(profile)
    m = atoms.size
    k = min(max_taps, m)
    best = 0.0
    for cuts in itertools.combinations(range(1, m), k - 1):
        bounds = (0,) + cuts + (m,)
        power = sum(abs(atoms[a:b].sum()) ** 2 for a, b in zip(bounds, bounds[1:]))
        best = max(best, power)
    return best


def random_profile(rng: np.random.Generator, count: int, spread_s: float = 5e-6) -> MultipathProfile:
    return MultipathProfile(tuple(
        MultipathComponent(float(rng.uniform(0.0, spread_s)), float(rng.uniform(0.05, 1.0)),
                           float(rng.uniform(-math.pi, math.pi)))
        for _ in range(count)))


@recipe("approximation", "1000 random profiles: legal tap sets, power within 0.1 dB of the oracle")
def approximation(seed: int) -> Tuple[bool, str]:
    rng = np.random.Generator(np.random.PCG64(seed))
    worst = 0.0
    for _ in range(1000):
        count = int(rng.integers(1, 13))
        profile = random_profile(rng, count)
        result = approximate(profile)
        if len(result.taps) > 4 or any(not 0 <= i < 512 for i in result.taps.indices):
            return False, f"illegal tap set {result.taps.indices}"
        if count <= 6:
            oracle = contiguous_oracle(profile)
            if oracle > 0 and result.retained_power > 0:
                worst = max(worst, abs(10.0 * math.log10(result.retained_power / oracle)))
    return worst <= 0.1, f"worst power gap {worst:.2e} dB"


# ----------------------------------------------------------------------------
# Planning, similarity and file formats
# ----------------------------------------------------------------------------

def naive_pair_score(m: LinkGainMatrix, p: int, q: int) -> float:
    """Direct link-budget arithmetic, independent of the planner module."""
    def s_db(i, j):
        return (float(m.p_ru_dbm[i]) + float(m.g_ru_dbi[i]) - float(m.a_ru_db[i])
                - float(m.path_loss_db[i, j]) + float(m.g_ue_dbi[j]))

    total = 0.0
    for j in range(m.ue_count):
        noise = 10.0 ** (m.thermal_noise_dbm / 10.0) * 10.0 ** (float(m.f_ue_db[j]) / 10.0)
        gp = 10.0 * math.log10(10.0 ** (s_db(p, j) / 10.0) / (noise + 10.0 ** (s_db(q, j) / 10.0)))
        gq = 10.0 * math.log10(10.0 ** (s_db(q, j) / 10.0) / (noise + 10.0 ** (s_db(p, j) / 10.0)))
        total += max(gp, gq)
    return total / m.ue_count


@recipe("planner", "100 random 6x10 matrices match a naive recomputation; attenuation lowers every SINR")
def planner(seed: int) -> Tuple[bool, str]:
    rng = np.random.Generator(np.random.PCG64(seed))
    for trial in range(100):
        m = LinkGainMatrix.from_path_loss(rng.uniform(60.0, 130.0, size=(6, 10)))
        result = plan_exhaustive(m)
        best_pair, best_score = None, -math.inf
        for p, q in itertools.combinations(range(6), 2):
            score = naive_pair_score(m, p, q)
            if score > best_score:
                best_pair, best_score = (p, q), score
        if result.best_pair != best_pair or result.best_score != best_score:
            return False, f"trial {trial}: {result.best_pair}/{result.best_score!r} vs {best_pair}/{best_score!r}"

        previous = None
        for a in range(0, 51, 10):
            attenuated = m.with_attenuation(float(a))
            values = [sinr(attenuated, s, j, (0, 1)) for s in (0, 1) for j in range(10)]
            if previous is not None and not all(v < u for v, u in zip(values, previous)):
                return False, f"trial {trial}: SINR did not decrease at A_RU={a} dB"
            previous = values
    return True, "100/100 matrices agree bit-for-bit"


@recipe("similarity", "rho(0)=1 for identical series, |rho|<=1, injected shift recovered")
def similarity_metric(seed: int) -> Tuple[bool, str]:
    rng = np.random.Generator(np.random.PCG64(seed))
    x = rng.standard_normal(200)
    same = similarity(x, x)
    profile = cross_correlation_profile(x, rng.standard_normal(150))
    shift = 3
    y = np.concatenate([np.zeros(shift), x[:-shift]])
    found = similarity(x, y)
    ok = (abs(same.rho - 1.0) < 1e-9 and same.lag == 0
          and all(abs(v) <= 1.0 + 1e-12 for v in profile.values()) and found.lag == shift)
    return ok, f"rho(0)={same.rho:.12f}, recovered lag {found.lag} (injected {shift})"


@recipe("formats", ".iq, scenario JSON and frame binary round-trip bit-exactly")
def formats(seed: int) -> Tuple[bool, str]:
    rng = np.random.Generator(np.random.PCG64(seed))
    samples = (rng.standard_normal(1000) + 1j * rng.standard_normal(1000)).astype(np.complex64)
    wave = IqWaveform(samples.astype(np.complex128), 1e6)

    links = {}
    for tx, rx in itertools.permutations(range(3), 2):
        idx = rng.choice(512, size=int(rng.integers(1, 5)), replace=False)
        gains = (rng.standard_normal(idx.size) + 1j * rng.standard_normal(idx.size)).astype(np.complex64)
        links[(tx, rx)] = TapSet(tuple((int(i), complex(g)) for i, g in zip(idx, gains)))
    scenario = single_frame_scenario(links)

    with tempfile.TemporaryDirectory() as tmp:
        path = save_iq_file(wave, Path(tmp) / "capture.iq")
        iq_ok = np.array_equal(load_iq_file(path, 1e6).samples, wave.samples)
    original = scenario_to_dict(scenario)
    json_ok = scenario_to_dict(scenario_from_dict(json.loads(json.dumps(original)))) == original
    frame = scenario.frame(0)
    decoded, _ = decode_frame(encode_frame(frame))
    frame_ok = decoded == frame
    return iq_ok and json_ok and frame_ok, f"iq={iq_ok} json={json_ok} frame={frame_ok}"


# ----------------------------------------------------------------------------
# Runner
# ----------------------------------------------------------------------------

@dataclass
class RecipeMetrics:
    """Outcome and timing of one recipe."""
    name: str
    start_time: float = 0.0
    end_time: float = 0.0
    passed: bool = False
    detail: str = ""
    error: Optional[str] = None

    @property
    def duration(self) -> float:
        return self.end_time - self.start_time


@dataclass
class ReproRunner:
    seed: int
    _metrics: List[RecipeMetrics] = field(default_factory=list)

    def run(self, names: List[str], on_done: Optional[Callable[[RecipeMetrics], None]] = None) -> bool:
        for name in names:
            metrics = RecipeMetrics(name=name, start_time=time.time())
            try:
                metrics.passed, metrics.detail = RECIPES[name].fn(self.seed)
            except TwinError as e:
                metrics.error = str(e)
            metrics.end_time = time.time()
            self._metrics.append(metrics)
            if on_done is not None:
                on_done(metrics)
        return all(m.passed for m in self._metrics)

    def get_summary(self) -> Dict:
        return {
            "seed": self.seed,
            "passed": sum(m.passed for m in self._metrics),
            "failed": sum(not m.passed for m in self._metrics),
            "total_seconds": sum(m.duration for m in self._metrics),
            "recipes": {
                m.name: {"passed": m.passed, "seconds": m.duration,
                         "detail": m.error or m.detail}
                for m in self._metrics
            },
        }

    def print_summary(self) -> None:
        rows = [(m.name, "[green]pass[/green]" if m.passed else "[red]FAIL[/red]",
                 f"{m.duration:.2f}", m.error or m.detail) for m in self._metrics]
        console.print(make_table(f"Reproduction (seed {self.seed})",
                                 ["recipe", "result", "time (s)", "detail"], rows,
                                 numeric=["time (s)"]))
        summary = self.get_summary()
        console.print(f"[bold]{summary['passed']}/{len(self._metrics)} passed[/bold] "
                      f"in {summary['total_seconds']:.1f} s")
