"""Command handlers for finite-ages."""

import logging
from dataclasses import dataclass, replace
from typing import Dict, FrozenSet, List, Optional

from finite_ages.backend import ash as ash_mod
from finite_ages.backend import encode3 as enc3
from finite_ages.backend import metric as met
from finite_ages.backend.fraisse import grow, verify_realization
from finite_ages.backend.ideals import is_initial_segment, is_up_directed, iter_minimal_amalgams
from finite_ages.backend.oracles import get_oracle, oracle_table
from finite_ages.backend.structures import age, canonical_form, canonical_structure, find_embedding
from finite_ages.commands.parser import ParsedCommand, get_command_names
from finite_ages.config import SCALAR_MODES, Config
from finite_ages.data.formats import (
    dump_metric,
    dump_structure,
    format_scalar,
    parse_scalar,
    read_metric,
    read_structure,
    read_text,
    write_text,
)
from finite_ages.data.types import MetricSpace, Signature
from finite_ages.errors import AgesError, InputError, ResourceLimitError

log = logging.getLogger(__name__)

EXIT_FOUND = 0
EXIT_NOT_FOUND = 1
EXIT_INPUT = 2
EXIT_RESOURCE = 3

GLOBAL_FLAGS = frozenset({"verbose", "copy", "jobs", "tolerance", "seed"})

# Flags each verb accepts besides the global ones
ALLOWED_FLAGS: Dict[str, FrozenSet[str]] = {
    "help": frozenset(),
    "embed": frozenset({"out"}),
    "canon": frozenset({"out"}),
    "age": frozenset({"max-size", "out"}),
    "amalgams": frozenset({"ideal", "out", "bound"}),
    "check-ideal": frozenset({"ideal", "max-size", "bound"}),
    "grow": frozenset({"ideal", "size", "check", "out", "log", "bound", "no-check"}),
    "metric": frozenset({"dim", "t", "auto", "thresholds", "out", "forbid", "window", "mode"}),
    "ash": frozenset({"flavor", "parts", "part-size", "cap", "join", "bound-limit", "truncation", "size", "out"}),
    "encode3": frozenset({"nat", "decode", "rigidity", "out", "signature"}),
}

METRIC_SUBCOMMANDS = ("embed-line", "embed-euclid", "spectrum", "omega", "encode", "decode", "omit-grow", "check-n3", "age-t")


@dataclass
class CommandResult:
    """Result of command execution."""

    success: bool
    message: str = ""
    action: str = ""  # "copy" when the report should also go to the clipboard
    data: Optional[dict] = None
    status: int = EXIT_FOUND


def _found(message: str, **data) -> CommandResult:
    return CommandResult(success=True, message=message, data=data or None, status=EXIT_FOUND)


def _not_found(message: str, **data) -> CommandResult:
    return CommandResult(success=False, message=message, data=data or None, status=EXIT_NOT_FOUND)


class CommandHandler:
    """Handles command execution."""

    def __init__(self, config: Optional[Config] = None) -> None:
        self.config = config or Config()

    def execute(self, cmd: ParsedCommand) -> CommandResult:
        """Execute a parsed command.

        Args:
            cmd: Parsed command

        Returns:
            CommandResult with status and message
        """
        if not cmd.name:
            return CommandResult(success=False, message="Geen commando", status=EXIT_INPUT)

        # Dispatch to handler
        handler_name = f"_cmd_{cmd.name.replace('-', '_')}"
        handler = getattr(self, handler_name, None)
        if handler is None or cmd.name not in get_command_names():
            return CommandResult(success=False, message=f"Onbekend commando: {cmd.name}", status=EXIT_INPUT)

        unknown = set(cmd.flags) - ALLOWED_FLAGS[cmd.name] - GLOBAL_FLAGS
        if unknown:
            flags = ", ".join(f"--{f}" for f in sorted(unknown))
            return CommandResult(success=False, message=f"Ongeldige vlag voor {cmd.name}: {flags}", status=EXIT_INPUT)

        base = self.config
        try:
            # Flag overrides last for this command only
            self.config = self._with_overrides(cmd)
            result = handler(cmd)
        except ResourceLimitError as exc:
            return CommandResult(success=False, message=f"Limiet bereikt: {exc}", status=EXIT_RESOURCE)
        except AgesError as exc:
            return CommandResult(success=False, message=f"Fout: {exc}", status=EXIT_INPUT)
        except OSError as exc:
            return CommandResult(success=False, message=f"Bestandsfout: {exc}", status=EXIT_INPUT)
        finally:
            self.config = base
        if "copy" in cmd.flags:
            result.action = "copy"
        return result

    # Flag helpers

    def _with_overrides(self, cmd: ParsedCommand) -> Config:
        updates = {}
        for flag, attr in (("jobs", "jobs"), ("seed", "seed"), ("max-size", "max_size"), ("bound", "search_bound")):
            if flag in cmd.flags:
                updates[attr] = _int_flag(cmd, flag)
        if "tolerance" in cmd.flags:
            try:
                updates["tolerance"] = float(cmd.flags["tolerance"])
            except ValueError:
                raise InputError(f"ongeldige waarde voor --tolerance: {cmd.flags['tolerance']}") from None
        if "mode" in cmd.flags:
            if cmd.flags["mode"] not in SCALAR_MODES:
                raise InputError(f"--mode moet een van {', '.join(SCALAR_MODES)} zijn")
            updates["scalar_mode"] = cmd.flags["mode"]
        return replace(self.config, **updates)

    def _args(self, cmd: ParsedCommand, count: int, usage: str) -> List[str]:
        if len(cmd.args) != count:
            raise InputError(f"Gebruik: {usage}")
        return cmd.args

    def _metric(self, path: str, mode: Optional[str] = None) -> MetricSpace:
        return read_metric(path, mode or self.config.scalar_mode, self.config.tolerance)

    def _write(self, cmd: ParsedCommand, text: str) -> List[str]:
        if "out" in cmd.flags:
            write_text(cmd.flags["out"], text)
            return [f"written {cmd.flags['out']}"]
        return []

    # Commands

    def _cmd_help(self, cmd: ParsedCommand) -> CommandResult:
        """Handle help command."""
        oracles = "\n".join(f"  {token:<30}{text}" for token, text in oracle_table().items())
        help_text = f"""STRUCTUREN
  embed <a.rst> <b.rst>             Zoek de lexicografisch kleinste inbedding a -> b
  canon <a.rst> [--out f]           Canonieke code (en canonieke nummering)
  age <s.rst> --max-size k          Codes van alle deelstructuren met <= k elementen

IDEALEN
  amalgams <a.rst> <b.rst> --ideal t        Minimale amalgamen van a en b
  check-ideal --ideal t --max-size k --bound b
                                    Beginsegment en opwaarts gericht tot grootte k
  grow --ideal t --size N --check k --seed s [--out g.rst] [--log log.txt]
                                    Laat een structuur groeien met leeftijd = ideaal

METRISCHE RUIMTEN
  metric embed-line <m.dmat>        Inbedding in de lijn
  metric embed-euclid <m.dmat> --dim n
  metric spectrum <m.dmat>
  metric omega <m.dmat> --t t       Grootste t-gescheiden deelverzameling
  metric encode <m.dmat> [--auto | --thresholds a,b,c] [--out e.rst]
  metric decode <e.rst> [--out m.dmat]
  metric omit-grow <doel.dmat>... --forbid a,b --window W
  metric check-n3 <m.dmat> --dim n  Criterium met n+3 punten
  metric age-t <m.dmat> --t t

ASSEN
  ash demo --flavor standard --parts k --part-size m --cap n [--truncation T] [--bound-limit L]
  ash demo --flavor standard ... --join <a.rst> <b.rst>
  ash demo --flavor graph <g.rst> | --flavor poset <p.rst> | --flavor poset --size n

TERNAIRE CODERING
  encode3 <a.rst> --nat K [--out t.rst]
  encode3 --decode <t.rst> [--signature "R0/2 R1/2"]
  encode3 --rigidity <a.rst> <b.rst> --nat K

ALGEMEEN
  --jobs n --seed s --tolerance x --verbose --copy

IDEALEN (--ideal)
{oracles}

EXITCODES
  0 gevonden/waar  1 niet gevonden/onwaar  2 invoerfout  3 limiet bereikt
"""
        return CommandResult(success=True, message=help_text)

    def _cmd_embed(self, cmd: ParsedCommand) -> CommandResult:
        """Handle embed command."""
        a_path, b_path = self._args(cmd, 2, "embed <a.rst> <b.rst>")
        a, b = read_structure(a_path), read_structure(b_path)
        f = find_embedding(a, b)
        if f is None:
            return _not_found("no embedding")
        lines = [f"embedding {f}"] + self._write(cmd, " ".join(str(y) for y in f.images) + "\n")
        return _found("\n".join(lines), images=list(f.images))

    def _cmd_canon(self, cmd: ParsedCommand) -> CommandResult:
        """Handle canon command."""
        (path,) = self._args(cmd, 1, "canon <a.rst>")
        s = read_structure(path)
        code = canonical_form(s)
        lines = [f"size {code.size}", f"code {code.hex()}"]
        lines += self._write(cmd, dump_structure(canonical_structure(s)))
        return _found("\n".join(lines), code=code.hex())

    def _cmd_age(self, cmd: ParsedCommand) -> CommandResult:
        """Handle age command."""
        (path,) = self._args(cmd, 1, "age <s.rst> --max-size k")
        s = read_structure(path)
        codes = sorted(age(s, self.config.max_size, self.config.jobs))
        records = [f"type {c.size} {c.hex()}" for c in codes]
        lines = records + [f"count {len(codes)}"]
        lines += self._write(cmd, "\n".join(records) + "\n")
        return _found("\n".join(lines), count=len(codes))

    def _cmd_amalgams(self, cmd: ParsedCommand) -> CommandResult:
        """Handle amalgams command."""
        a_path, b_path = self._args(cmd, 2, "amalgams <a.rst> <b.rst> --ideal <token>")
        oracle = get_oracle(cmd.flag("ideal", "all"))
        a, b = read_structure(a_path), read_structure(b_path)
        found = list(iter_minimal_amalgams(a, b, oracle, self.config.max_free_tuples))
        records = [f"amalgam {c.size} {canonical_form(c).hex()}" for c in found]
        lines = records + [f"count {len(found)}"]
        lines += self._write(cmd, "\n".join(dump_structure(c) for c in found))
        if not found:
            return _not_found("\n".join(lines), count=0)
        return _found("\n".join(lines), count=len(found))

    def _cmd_check_ideal(self, cmd: ParsedCommand) -> CommandResult:
        """Handle check-ideal command."""
        self._args(cmd, 0, "check-ideal --ideal <token> --max-size k --bound b")
        oracle = get_oracle(cmd.flag("ideal", "all"))
        max_size = self.config.max_size
        bound = self.config.search_bound
        segment = is_initial_segment(oracle, max_size)
        lines = [f"initial-segment {'yes' if segment.holds else 'no'} checked {segment.checked}"]
        if not segment.holds:
            lines.append(f"counterexample subset {' '.join(map(str, segment.subset))} of")
            lines.append(dump_structure(segment.member).rstrip())
        directed = is_up_directed(oracle, max_size, bound, self.config.search_budget, self.config.jobs)
        lines.append(f"up-directed {'yes' if directed.holds else 'not-found-within-bound'} pairs {len(directed.witnesses)}")
        if directed.failure is not None:
            for s in directed.failure:
                lines.append(dump_structure(s).rstrip())
        if segment.holds and directed.holds:
            return _found("\n".join(lines))
        return _not_found("\n".join(lines))

    def _cmd_grow(self, cmd: ParsedCommand) -> CommandResult:
        """Handle grow command."""
        self._args(cmd, 0, "grow --ideal <token> --size N --check k")
        oracle = get_oracle(cmd.flag("ideal", "all"))
        target = _int_flag(cmd, "size", 8)
        check = _int_flag(cmd, "check", 3)
        g, growth = grow(
            oracle,
            target,
            check,
            seed=self.config.seed,
            budget=self.config.search_budget,
            check_ideal="no-check" not in cmd.flags,
            jobs=self.config.jobs,
        )
        report = verify_realization(g, oracle, check, self.config.jobs)
        lines = [
            f"size {g.size}",
            f"stages {len(growth.stages)}",
            f"complete {'yes' if growth.complete else 'no'}",
            f"missing {len(report.missing)}",
            f"extra {len(report.extra)}",
        ]
        lines += self._write(cmd, dump_structure(g))
        if "log" in cmd.flags:
            write_text(cmd.flags["log"], growth.render())
            lines.append(f"written {cmd.flags['log']}")
        if "out" not in cmd.flags:
            lines.append(dump_structure(g).rstrip())
        if growth.complete and report.equal:
            return _found("\n".join(lines), size=g.size)
        return _not_found("\n".join(lines), size=g.size)

    def _cmd_metric(self, cmd: ParsedCommand) -> CommandResult:
        """Handle metric command and its subcommands."""
        if not cmd.args or cmd.first_arg not in METRIC_SUBCOMMANDS:
            return CommandResult(
                success=False,
                message=f"Gebruik: metric {'|'.join(METRIC_SUBCOMMANDS)} ...",
                status=EXIT_INPUT,
            )
        sub = cmd.first_arg
        handler = getattr(self, f"_metric_{sub.replace('-', '_')}")
        return handler(cmd, cmd.rest_args)

    def _one_path(self, paths: List[str], usage: str) -> str:
        if len(paths) != 1:
            raise InputError(f"Gebruik: metric {usage}")
        return paths[0]

    def _metric_embed_line(self, cmd: ParsedCommand, paths: List[str]) -> CommandResult:
        m = self._metric(self._one_path(paths, "embed-line <m.dmat>"))
        coords = met.embed_line(m)
        if coords is None:
            return _not_found("not embeddable")
        return _found("\n".join(f"x {i} {format_scalar(c)}" for i, c in enumerate(coords)))

    def _metric_embed_euclid(self, cmd: ParsedCommand, paths: List[str]) -> CommandResult:
        m = self._metric(self._one_path(paths, "embed-euclid <m.dmat> --dim n"), "float")
        dim = _int_flag(cmd, "dim", 2)
        coords = met.embed_euclid(m, dim)
        if coords is None:
            report = met.gram_report(m)
            return _not_found(f"not embeddable\npsd {'yes' if report.psd else 'no'}\nrank {report.rank}")
        return _found("\n".join(f"x {i} " + " ".join(f"{v:.12g}" for v in row) for i, row in enumerate(coords)))

    def _metric_spectrum(self, cmd: ParsedCommand, paths: List[str]) -> CommandResult:
        m = self._metric(self._one_path(paths, "spectrum <m.dmat>"))
        return _found("\n".join(f"value {format_scalar(v)}" for v in met.spectrum(m)))

    def _metric_omega(self, cmd: ParsedCommand, paths: List[str]) -> CommandResult:
        m = self._metric(self._one_path(paths, "omega <m.dmat> --t t"))
        t = _scalar_flag(cmd, "t", m.scalar_mode)
        result = met.omega_t(m, t, self.config.omega_exact_limit)
        lines = [f"omega {result.value}", "witness " + " ".join(map(str, result.witness))]
        if not result.exact:
            lines.append(f"upper {result.upper}")
        return _found("\n".join(lines), omega=result.value)

    def _metric_encode(self, cmd: ParsedCommand, paths: List[str]) -> CommandResult:
        m = self._metric(self._one_path(paths, "encode <m.dmat> [--auto | --thresholds a,b,c]"))
        thresholds = None
        if "thresholds" in cmd.flags and "auto" not in cmd.flags:
            thresholds = _scalars(cmd.flags["thresholds"], m.scalar_mode)
        e = met.encode_rel(m, thresholds)
        text = dump_structure(e.structure)
        lines = self._write(cmd, text) or [text.rstrip()]
        return _found("\n".join(lines))

    def _metric_decode(self, cmd: ParsedCommand, paths: List[str]) -> CommandResult:
        s = read_structure(self._one_path(paths, "decode <e.rst>"))
        mode = self.config.scalar_mode
        e = met.ThresholdEncoding(met.thresholds_from_signature(s.signature, mode), s, mode)
        m = met.decode_rel(e, self.config.tolerance)
        text = dump_metric(m)
        lines = self._write(cmd, text) or [text.rstrip()]
        return _found("\n".join(lines))

    def _metric_omit_grow(self, cmd: ParsedCommand, paths: List[str]) -> CommandResult:
        mode = self.config.scalar_mode
        forbidden = _scalars(cmd.flag("forbid", ""), mode)
        window = _scalar_flag(cmd, "window", mode, "64")
        targets = [self._metric(p) for p in paths]
        growth = met.omit_distance_grow(forbidden, targets, window, self.config.seed, 1, mode, self.config.tolerance)
        lines = [f"point {format_scalar(p)}" for p in growth.points]
        for stage in growth.stages:
            shift = "none" if stage.translation is None else format_scalar(stage.translation)
            lines.append(f"stage {stage.index} shift {shift}")
        lines.append(f"complete {'yes' if growth.complete else 'no'}")
        if growth.complete:
            return _found("\n".join(lines))
        return _not_found("\n".join(lines))

    def _metric_check_n3(self, cmd: ParsedCommand, paths: List[str]) -> CommandResult:
        m = self._metric(self._one_path(paths, "check-n3 <m.dmat> --dim n"), "float")
        report = met.check_n_plus_3(m, _int_flag(cmd, "dim", 1))
        lines = [
            f"subsets-embed {'yes' if report.subsets_embed else 'no'}",
            f"whole-embeds {'yes' if report.whole_embeds else 'no'}",
            f"consistent {'yes' if report.consistent else 'no'}",
        ]
        if report.failing_subset is not None:
            lines.append("failing-subset " + " ".join(map(str, report.failing_subset)))
        if report.consistent:
            return _found("\n".join(lines))
        return _not_found("\n".join(lines))

    def _metric_age_t(self, cmd: ParsedCommand, paths: List[str]) -> CommandResult:
        m = self._metric(self._one_path(paths, "age-t <m.dmat> --t t"))
        t = _scalar_flag(cmd, "t", m.scalar_mode)
        if met.age_t_member(m, t):
            return _found("member yes")
        return _not_found("member no")

    def _cmd_ash(self, cmd: ParsedCommand) -> CommandResult:
        """Handle ash demo command."""
        if cmd.first_arg != "demo":
            return CommandResult(success=False, message="Gebruik: ash demo --flavor ...", status=EXIT_INPUT)
        flavor = cmd.flag("flavor", "standard")
        files = cmd.rest_args
        # With --join the last two files are the coloured graphs
        own_file = len(files) > (2 if "join" in cmd.flags else 0)
        if flavor == "standard":
            a = ash_mod.standard_ash(_int_flag(cmd, "parts", 2), _int_flag(cmd, "part-size", 2), _int_flag(cmd, "cap", 1))
        elif flavor == "graph":
            if not own_file:
                raise InputError("graaf-bestand ontbreekt")
            a = ash_mod.graph_ash(read_structure(files.pop(0)))
        elif flavor == "poset":
            if own_file:
                a = ash_mod.poset_ash(read_structure(files.pop(0)))
            else:
                p, labels = ash_mod.subset_poset(_int_flag(cmd, "size", 2))
                a = ash_mod.poset_ash(p, labels)
        else:
            raise InputError(f"onbekende smaak: {flavor} (kies uit {', '.join(ash_mod.FLAVORS)})")

        truncation = _int_flag(cmd, "truncation", 3)
        axioms = ash_mod.check_ash_axioms(a, truncation)
        lines = [
            f"flavor {a.flavor}",
            f"ground {len(a.ground)}",
            f"axiom1 {'pass' if axioms.axiom1 else 'fail'}",
            f"axiom2 {'pass' if axioms.axiom2 else 'fail'} truncation {truncation}",
            f"trusted-bound {'none' if a.trusted_bound is None else a.trusted_bound}",
        ]
        if axioms.axiom2_failure is not None:
            lines.append("axiom2-failure " + " ".join(sorted(axioms.axiom2_failure)))
        if axioms.exhausted_at is not None:
            lines.append("exhausted " + " ".join(sorted(axioms.exhausted_at)))
        lines.append(f"axiom3 {axioms.axiom3_note}")
        if axioms.axiom3_witness is not None:
            lines.append("axiom3-witness " + " ".join(sorted(axioms.axiom3_witness)))

        status_ok = axioms.axiom1 and axioms.axiom2
        if "join" in cmd.flags:
            if len(files) != 2:
                raise InputError("Gebruik: ash demo ... --join <a.rst> <b.rst>")
            c1, c2 = read_structure(files[0]), read_structure(files[1])
            joined = ash_mod.directed_join(c1, c2, a, subset_limit=self.config.condition5_subset_limit)
            lines.append(f"join {'complete' if joined.complete else 'incomplete'} size {joined.structure.size}")
            text = dump_structure(joined.structure)
            lines += self._write(cmd, text) or [text.rstrip()]
            status_ok = status_ok and joined.complete
        if a.flavor == "standard":
            bound = ash_mod.representation_size_bound(a, _int_flag(cmd, "bound-limit", 4))
            lines.append(f"bound {bound.bound}")
            lines.append(f"certificate {'yes' if bound.certified else 'no'} {bound.note}")
        if status_ok:
            return _found("\n".join(lines))
        return _not_found("\n".join(lines))

    def _cmd_encode3(self, cmd: ParsedCommand) -> CommandResult:
        """Handle encode3 command."""
        if "decode" in cmd.flags:
            (path,) = self._args(cmd, 1, "encode3 --decode <t.rst> [--signature \"R0/2 ...\"]")
            signature = Signature.parse(cmd.flags["signature"]) if "signature" in cmd.flags else None
            core = enc3.decode_text(read_text(path), signature)
            text = dump_structure(core)
            return _found("\n".join(self._write(cmd, text) or [text.rstrip()]))
        spine = _int_flag(cmd, "nat", 5)
        if "rigidity" in cmd.flags:
            a_path, b_path = self._args(cmd, 2, "encode3 --rigidity <a.rst> <b.rst> --nat K")
            report = enc3.rigidity_check(read_structure(a_path), read_structure(b_path), spine)
            lines = [
                f"core-isomorphisms {report.core_isomorphisms}",
                f"encoding-isomorphisms {report.encoding_isomorphisms}",
                f"spine-fixed {'yes' if report.spine_fixed else 'no'}",
                f"restrictions {'yes' if report.restrictions_are_isomorphisms else 'no'}",
                f"lifts {'yes' if report.lifts_are_isomorphisms else 'no'}",
            ]
            if report.holds:
                return _found("\n".join(lines))
            return _not_found("\n".join(lines))
        (path,) = self._args(cmd, 1, "encode3 <a.rst> --nat K")
        t = enc3.encode(read_structure(path), spine)
        text = enc3.dump_encoding(t)
        return _found("\n".join(self._write(cmd, text) or [text.rstrip()]))


def _int_flag(cmd: ParsedCommand, name: str, default: Optional[int] = None) -> int:
    if name not in cmd.flags:
        if default is None:
            raise InputError(f"--{name} ontbreekt")
        return default
    try:
        value = int(cmd.flags[name])
    except ValueError:
        raise InputError(f"ongeldige waarde voor --{name}: {cmd.flags[name]}") from None
    if value < 0:
        raise InputError(f"--{name} moet >= 0 zijn")
    return value


def _scalars(text: str, mode: str):
    try:
        return [parse_scalar(v.strip(), mode) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _scalar_flag(cmd: ParsedCommand, name: str, mode: str, default: Optional[str] = None):
    text = cmd.flags.get(name, default)
    if text is None:
        raise InputError(f"--{name} ontbreekt")
    values = _scalars(text, mode)
    if len(values) != 1:
        raise InputError(f"--{name} verwacht één waarde")
    return values[0]
