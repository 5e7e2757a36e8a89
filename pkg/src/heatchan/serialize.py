"""Result-file formats: CSV and JSONL with a resolved-parameter header.

Every emitted file starts with a header carrying the fully resolved run
parameters, so the run can be reproduced from the file alone.  Floats are
serialized with 17 significant digits (exact binary64 round trip); empty
fields mark values a skipped point never produced.
"""

from __future__ import annotations

import csv
import io
import json

__all__ = [
    "SWEEP_COLUMNS",
    "LEMMA2_COLUMNS",
    "SIM_COLUMNS",
    "DEMO_COLUMNS",
    "BOUNDS_COLUMNS",
    "CONVERSE_COLUMNS",
    "CLASSIFY_COLUMNS",
    "LEMMA1_COLUMNS",
    "fmt_value",
    "render_result",
    "write_result",
    "read_result",
    "ResultWriter",
]

SWEEP_COLUMNS = ["spec", "sigma2", "snr", "L", "n", "messages", "rate_nats",
                 "trials", "errors", "err_prob", "ci_lo", "ci_hi",
                 "ach_rate_pre_limit", "seed"]
LEMMA2_COLUMNS = ["n", "m", "mean_y", "mean_z", "target_y", "target_z",
                  "var_y", "var_z", "hit_frac", "eps"]
SIM_COLUMNS = ["k", "x", "var_model", "var_emp", "rel_err"]
DEMO_COLUMNS = ["spec", "sigma2", "snr", "best_L", "rate_nats"]
BOUNDS_COLUMNS = ["spec", "sigma2", "snr", "L", "alphaL", "eps", "s_used",
                  "pre_limit_rate", "asymptotic_rate", "rho_lower_bound"]
CONVERSE_COLUMNS = ["spec", "rho", "l0", "noise", "delta", "eta",
                    "eps_delta_eta", "beta_tilde", "h_noise", "h_minus",
                    "K", "bound"]
CLASSIFY_COLUMNS = ["spec", "horizon", "verdict", "liminf_ratio",
                    "limsup_ratio", "decay_stat"]
LEMMA1_COLUMNS = ["noise", "delta", "trials", "seed", "value"]


def fmt_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


def _header_line(command: str, params: dict) -> str:
    items = " ".join(f"{k}={fmt_value(v)}" for k, v in params.items())
    return f"# heatchan {command} {items}".rstrip()


def render_result(command: str, params: dict, columns, rows, fmt: str = "csv") -> str:
    """Render a result file to a string (stable bytes for identical inputs)."""
    if fmt == "csv":
        buf = io.StringIO()
        buf.write(_header_line(command, params) + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([fmt_value(row.get(c)) for c in columns])
        return buf.getvalue()
    if fmt == "jsonl":
        lines = [json.dumps({"header": {"command": command,
                                        **{k: fmt_value(v) for k, v in params.items()}}},
                            separators=(",", ":"))]
        for row in rows:
            parts = []
            for c in columns:
                v = row.get(c)
                if v is None:
                    parts.append(f"{json.dumps(c)}:null")
                elif isinstance(v, str):
                    parts.append(f"{json.dumps(c)}:{json.dumps(v)}")
                else:
                    parts.append(f"{json.dumps(c)}:{fmt_value(v)}")
            lines.append("{" + ",".join(parts) + "}")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown output format {fmt!r} (csv|jsonl)")


def write_result(path, command: str, params: dict, columns, rows,
                 fmt: str = "csv") -> None:
    text = render_result(command, params, columns, rows, fmt)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


class ResultWriter:
    """Incremental writer producing byte-identical output to render_result."""

    def __init__(self, path, command: str, params: dict, columns, fmt: str = "csv"):
        if fmt not in ("csv", "jsonl"):
            raise ValueError(f"unknown output format {fmt!r} (csv|jsonl)")
        self.columns = list(columns)
        self.fmt = fmt
        self._fh = open(path, "w", encoding="utf-8", newline="")
        if fmt == "csv":
            self._fh.write(_header_line(command, params) + "\n")
            self._csv = csv.writer(self._fh, lineterminator="\n")
            self._csv.writerow(self.columns)
        else:
            header = {"header": {"command": command,
                                 **{k: fmt_value(v) for k, v in params.items()}}}
            self._fh.write(json.dumps(header, separators=(",", ":")) + "\n")

    def write_row(self, row: dict) -> None:
        if self.fmt == "csv":
            self._csv.writerow([fmt_value(row.get(c)) for c in self.columns])
        else:
            parts = []
            for c in self.columns:
                v = row.get(c)
                if v is None:
                    parts.append(f"{json.dumps(c)}:null")
                elif isinstance(v, str):
                    parts.append(f"{json.dumps(c)}:{json.dumps(v)}")
                else:
                    parts.append(f"{json.dumps(c)}:{fmt_value(v)}")
            self._fh.write("{" + ",".join(parts) + "}\n")
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def _parse_scalar(text: str):
    if text == "":
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def read_result(path):
    """Parse a result file back into (command, params, columns, rows).

    Handles both the CSV and JSONL renderings.
    """
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline()
        rest = fh.read()
    if first.startswith("{"):
        header = json.loads(first)["header"]
        command = header.pop("command")
        params = {k: _parse_scalar(v) for k, v in header.items()}
        rows = [json.loads(line) for line in rest.splitlines() if line.strip()]
        columns = list(rows[0].keys()) if rows else []
        return command, params, columns, rows
    if not first.startswith("# heatchan "):
        raise ValueError(f"{path} does not look like a heatchan result file")
    tokens = first[len("# heatchan "):].strip().split(" ")
    command = tokens[0]
    params = {}
    for tok in tokens[1:]:
        if "=" in tok:
            k, v = tok.split("=", 1)
            params[k] = _parse_scalar(v)
    reader = csv.reader(io.StringIO(rest))
    table = list(reader)
    columns = table[0] if table else []
    rows = [{c: _parse_scalar(v) for c, v in zip(columns, line)} for line in table[1:]]
    return command, params, columns, rows
