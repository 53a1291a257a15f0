"""CSV artifacts: one provenance comment line, a header row, then data rows.

Floats are written with ``repr`` so that :func:`read_csv` restores them
exactly.
"""
import csv
import io

from ssacc import __version__


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if hasattr(v, "item"):
        return _fmt(v.item())
    return str(v)


def render_csv(columns, rows, provenance: dict) -> str:
    buf = io.StringIO()
    prov = " ".join(f"{k}={v}" for k, v in [("ssacc", __version__)] + list(provenance.items()))
    buf.write(f"# {prov}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        if len(row) != len(columns):
            raise ValueError("row width does not match the header")
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def write_csv(path, columns, rows, provenance: dict) -> str:
    text = render_csv(columns, rows, provenance)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return text


def _parse(cell: str):
    if cell in ("true", "false"):
        return cell == "true"
    try:
        return int(cell)
    except ValueError:
        pass
    try:
        return float(cell)
    except ValueError:
        return cell


def read_csv_text(text: str):
    """Return (provenance dict, columns, rows) with numbers and booleans restored."""
    lines = text.splitlines()
    prov = {}
    body = []
    for line in lines:
        if line.startswith("#"):
            for tok in line[1:].split():
                if "=" in tok:
                    k, v = tok.split("=", 1)
                    prov[k] = v
        else:
            body.append(line)
    reader = csv.reader(body)
    columns = next(reader)
    rows = [[_parse(c) for c in r] for r in reader]
    return prov, columns, rows


def read_csv(path):
    with open(path, encoding="utf-8") as fh:
        return read_csv_text(fh.read())
