"""End-to-end refinement: parse, check, choose representations, rewrite, emit."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace

from .ast import (Bubble, Decl, FunctionT, IntRange, MatrixLit, MatrixT, Objective, Ref, Spec,
                  canonical, is_abstract, lit, split_conjunction, walk)
from .checker import load
from .emit import FlatModel, fix_names, flatness_problems, model_problems, spec_hash
from .engine import MAX_MODELS, MAX_STEPS, RuleContext, finalize_bubbles, normal_forms
from .errors import RefinementError, ResourceLimit
from .oracle import FuncV, MatrixV, constant_env
from .printer import print_expr
from .representation import (add_channelling, add_structural_constraints, cell_type,
                             enumerate_representations, leaf_decls, matrix_dims, taken_names)
from .ast import NameSupply
from .rules import ALL_RULES, LOOP_INVARIANT


@dataclass
class RefineConfig:
    mode: str = "single"  # or "per-constraint"
    all_reps: bool = False
    hoist: bool = True
    max_models: int = MAX_MODELS
    max_steps: int = MAX_STEPS
    undef: str = "exclude"


def refine(spec: Spec, config: RefineConfig = None, source_text: str = "") -> list:
    """All flat models of an instantiated, type-checked specification."""
    config = config or RefineConfig()
    models, keys = [], set()
    h = spec_hash(source_text) if source_text else ""
    for rs in enumerate_representations(spec, config.mode, config.all_reps):
        for m in refine_assignment(rs, config):
            key = (canonical_model(m.spec))
            if key in keys:
                continue
            keys.add(key)
            models.append(replace(m, source_hash=h))
            if len(models) > config.max_models:
                raise ResourceLimit(f"more than {config.max_models} models")
    return models


def refine_text(source: str, params: str = None, config: RefineConfig = None):
    """Parse and refine; returns (instantiated spec, models, warnings)."""
    spec, warnings = load(source, params)
    return spec, refine(spec, config, source + "\n" + (params or "")), warnings


def canonical_model(spec: Spec):
    obj = canonical(spec.objective.expr) if spec.objective else None
    return (tuple(d for d in spec.decls), obj, tuple(canonical(c) for c in spec.constraints))


def refine_assignment(rs, config: RefineConfig) -> list:
    """Phases 5 to 8 for one representation assignment."""
    supply = NameSupply(taken_names(rs.spec))
    n_user = len(rs.spec.constraints)
    rs = add_channelling(rs, supply)
    n_chan = len(rs.spec.constraints) - n_user
    rs = add_structural_constraints(rs, supply)
    spec = rs.spec
    origins = ["user"] * n_user + ["channel"] * n_chan
    origins += ["structural"] * (len(spec.constraints) - len(origins))
    ctx = RuleContext({d.name: d for d in spec.decls}, supply,
                      options={"consts": constant_env(spec), "close_bubbles": True})

    def forms(e):
        nfs = normal_forms(e, ALL_RULES, ctx, config.max_steps, config.max_models)
        good = [nf for nf in nfs if not flatness_problems(nf.expr, allow_bubbles=True)]
        if not good:
            stuck = nfs[0].expr
            why = ", ".join(sorted(set(flatness_problems(stuck, True))))
            raise RefinementError(f"no rule refines {print_expr(stuck)} ({why})")
        return good

    per_constraint = [forms(c) for c in spec.constraints]
    obj_forms = [forms(spec.objective.expr)] if spec.objective is not None else []
    out = []
    for combo in itertools.product(*(per_constraint + obj_forms)):
        if len(out) >= config.max_models:
            raise ResourceLimit(f"more than {config.max_models} models")
        out.append(_assemble(rs, combo, config, origins))
    return out


def _assemble(rs, combo, config: RefineConfig, origins: list) -> FlatModel:
    spec = rs.spec
    n_cons = len(origins)
    cons, aux = [], []
    trace, steps = [], 0
    for nf, origin in zip(combo[:n_cons], origins):
        e, a = finalize_bubbles(nf.expr)
        cons.append((e, origin))
        aux += a
        trace += nf.trace
        steps += nf.steps
    objective = None
    if spec.objective is not None:
        nf = combo[n_cons]
        e = nf.expr
        if isinstance(e, Bubble):
            aux += list(e.aux_decls)
            helpers, a = finalize_bubbles(e.helpers)
            cons.append((helpers, "user"))
            aux += a
            e = e.value
        e, a = finalize_bubbles(e)
        aux += a
        objective = Objective(spec.objective.direction, e)
        trace += nf.trace
        steps += nf.steps
    flat_cons = []  # (constraint, origin)
    for c, origin in cons:
        for part in split_conjunction(c):
            if config.hoist:
                nfs = normal_forms(part, [LOOP_INVARIANT])
                part = nfs[0].expr
                trace += nfs[0].trace
            flat_cons += [(p, origin) for p in split_conjunction(part) if p != lit(True)]
    flat_cons = _dedupe(flat_cons)
    decls = _flat_decls(rs, aux, [c for c, _ in flat_cons], objective)
    flat = Spec(tuple(decls), objective, tuple(c for c, _ in flat_cons))
    problems = model_problems(flat)
    if problems:
        raise RefinementError("refined model is not flat: " + ", ".join(sorted(set(problems))))
    m = FlatModel(flat, rs.assignment, rs.source, tuple(trace), steps,
                  aux=tuple(d.name for d in aux), origins=tuple(o for _, o in flat_cons))
    return fix_names(m)


def _dedupe(cons):
    out, keys = [], set()
    for c, origin in cons:
        k = canonical(c)
        if k not in keys:
            keys.add(k)
            out.append((c, origin))
    return out


def _flat_decls(rs, aux, cons, objective) -> list:
    spec = rs.spec
    used = set()
    for e in cons + ([objective.expr] if objective else []):
        used |= {n.name for n in walk(e) if isinstance(n, Ref)}
    out = []
    consts = constant_env(spec)
    for d in spec.decls:
        if d.kind == "letting" and d.name in used:
            out.append(_constant_matrix(d, consts[d.name]))
    for d in spec.decls:
        if d.kind != "find":
            continue
        if not is_abstract(d.domain):
            out.append(Decl("find", d.name, d.domain))
            continue
        for tag, base in rs.assignment.bases(d.name):
            out += leaf_decls(base, cell_type(d.domain), tag, matrix_dims(d.domain))
    seen = set()
    for d in aux:
        if d.name in seen:
            continue
        seen.add(d.name)
        if is_abstract(d.domain):
            out += [replace(x, kind="aux") for x in leaf_decls(d.name, d.domain, d.rep)]
        else:
            out.append(Decl("aux", d.name, d.domain))
    return out


def _constant_matrix(d: Decl, value) -> Decl:
    """A constant function or matrix as a one-dimensional matrix letting."""
    if isinstance(value, FuncV):
        t = d.domain if isinstance(d.domain, FunctionT) else d.value.typ
        frm, to = t.frm, t.to
        g = value.as_dict()
        fill = to.lo if isinstance(to, IntRange) and to.bounded else 0
        items = tuple(lit(g.get(i, fill)) for i in frm.values())
        return Decl("letting", d.name, MatrixT((frm,), to), value=MatrixLit(items, frm))
    if isinstance(value, MatrixV):
        return d
    raise RefinementError(f"constant '{d.name}' cannot appear in a flat model")
