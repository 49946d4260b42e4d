"""Built-in safety properties of the monitor, one set per UCC.

Each template uses ``{k}`` for the UCC index. ``bracketing`` records how the
printed original was grouped where its typesetting leaves room for doubt.
"""

from __future__ import annotations

from dataclasses import dataclass

from .syntax import format_formula, parse_formula

# (property number, template, bracketing note)
_SHARED = (1, "G((d_addr in CR & w_en) -> reset)", "")

_PER_UCC = (
    (2, "G(reset -> (((!(pc in UCC{k}) & X(pc) in UCC{k}) -> (X(ret_exp{k}) = op_ret | reset))"
        " W pc in UCC{k}))",
     "'| reset' sits inside the implication consequent, which is the left operand of W"),
    (3, "G((!(pc in UCC{k}) & Y(pc) in UCC{k} & !Y(irq_jmp)) ->"
        " ((X(pc) in UCC{k} -> (X(ret_exp{k}) = op_ret | reset)) W pc in UCC{k}))",
     "'| reset' sits inside the implication consequent, which is the left operand of W"),
    (4, "G((pc in UCC{k} & !(Y(pc) in UCC{k})) ->"
        " ((X(ret_exp{k}) = ret_exp{k} | reset) W !(pc in UCC{k})))", ""),
    (5, "G((!(pc in UCC{k}) & Y(pc) in UCC{k} & Y(irq_jmp) & !Y(reset)) ->"
        " (X(ret_exp{k}) = ret_exp{k} W (pc in UCC{k} | reset)))", ""),
    (6, "G((!reset & pc in UCC{k} & !(X(pc) in UCC{k}) & !irq_jmp) ->"
        " (X(pc) = ret_exp{k} | X(reset)))", ""),
    (7, "G(reset -> ((!(Y(pc) = pc) -> (bp{k} = sp | reset)) W pc in UCC{k}))",
     "unbalanced parenthesis in the original closed after '| reset'; bp is compared with the"
     " sp of the same snapshot because snapshots sample sp before the instruction executes"),
    (8, "G((!(pc in UCC{k}) & X(pc) in UCC{k}) -> (X(bp{k}) = bp{k} | reset))", ""),
    (9, "G((!(pc in UCC{k}) & Y(pc) in UCC{k} & !Y(irq_jmp)) ->"
        " ((!(Y(pc) = pc) -> (bp{k} = sp | reset)) W pc in UCC{k}))",
     "bp is compared with the sp of the same snapshot, as in property 7"),
    (10, "G((pc in UCC{k} & !(Y(pc) in UCC{k})) ->"
         " ((X(bp{k}) = bp{k} | reset) W !(pc in UCC{k})))", ""),
    (11, "G((!(pc in UCC{k}) & Y(pc) in UCC{k} & Y(irq_jmp) & !Y(reset)) ->"
         " (X(bp{k}) = bp{k} W (pc in UCC{k} | reset)))", ""),
    (12, "G((pc in UCC{k} & w_en & d_addr >= bp{k}) -> reset)", ""),
    (13, "G((!reset & pc in UCC{k} & !(X(pc) in UCC{k}) & !irq_jmp) ->"
         " (X(sp) = bp{k} | X(reset)))", ""),
)

@dataclass(frozen=True)
class Spec:
    eq: int
    ucc: int | None
    formula: object
    bracketing: str = ""

    @property
    def id(self) -> str:
        """``"1"`` for the shared property, ``"<eq>"`` for UCC 0, ``"<eq>.<k>"`` otherwise."""
        if self.ucc is None or self.ucc == 0:
            return str(self.eq)
        return f"{self.eq}.{self.ucc}"

    @property
    def text(self) -> str:
        return format_formula(self.formula)


def builtin_specs(n_ucc: int) -> list[Spec]:
    if n_ucc < 1:
        raise ValueError("at least one UCC is required")
    specs = [Spec(_SHARED[0], None, parse_formula(_SHARED[1], n_ucc))]
    for k in range(n_ucc):
        for eq, template, note in _PER_UCC:
            specs.append(Spec(eq, k, parse_formula(template.format(k=k), n_ucc), note))
    return specs


def select_specs(specs: list[Spec], selection: str | None) -> list[Spec]:
    """Pick specs by comma-separated ids; a bare property number selects every UCC's copy."""
    if not selection or selection == "all":
        return list(specs)
    chosen = []
    for part in selection.split(","):
        part = part.strip()
        hits = [s for s in specs if s.id == part or (part.isdigit() and str(s.eq) == part)]
        if not hits:
            raise KeyError(part)
        chosen += [s for s in hits if s not in chosen]
    return chosen


def format_catalog(specs: list[Spec]) -> str:
    """Tab-separated catalog: id, property number, UCC index (or '-'), formula, bracketing note."""
    lines = ["id\teq\tucc\tformula\tbracketing"]
    for s in specs:
        ucc = "-" if s.ucc is None else str(s.ucc)
        lines.append(f"{s.id}\t{s.eq}\t{ucc}\t{s.text}\t{s.bracketing}")
    return "\n".join(lines) + "\n"
