#!/usr/bin/env python3
"""Writes the synthetic regression corpus: 12 edit patterns, 3-5 changes each.

Deterministic; re-running overwrites corpus/ with identical content.
"""
import json
import shutil
from pathlib import Path

ROOT = Path(__file__).resolve().parent / "corpus"

SIGNATURES = {
    "Conf#get": "String",
    "Holder#getConf": "Conf",
    "Holder#config": "Conf",
    "Pen#getColor": "Color",
    "Queue#isReady": "boolean",
    "Meter#count": "number",
    "Rows#length": "number",
    "Mode#current": "number",
}


def ctx(i, tag):
    """Unrelated context statements, varied per instance."""
    lines = [
        [],
        [f'audit.record("{tag}");'],
        [f'audit.record("{tag}");', "audit.flush();"],
    ][i % 3]
    return lines


def method(name, params, body):
    inner = "\n".join("    " + line for line in body)
    return f"void {name}({', '.join(params)}) {{\n{inner}\n}}\n"


def block(lines, indent="    "):
    return [indent + line for line in lines]


def p_rename(i):
    s = ["s", "stream", "in", "src", "st"][i]
    return (["Stream " + s], [f"{s}.open();"], [f"{s}.openStream();"])


def p_guard(i):
    v = ["v", "item", "val", "e", "x"][i]
    return (
        ["Sink sink", "Entry " + v],
        [f"sink.accept({v});"],
        [f"if ({v} != null) {{", f"    sink.accept({v});", "}"],
    )


def p_flush(i):
    f = ["f", "out", "w", "file", "dst"][i]
    return (
        ["Writer " + f, "Data d"],
        [f"{f}.write(d);"],
        [f"{f}.write(d);", f"{f}.flush();"],
    )


def p_timeout_arg(i):
    s = ["s", "sock", "conn", "c", "link"][i]
    return (["Socket " + s, "Host h"], [f"{s}.connect(h);"], [f"{s}.connect(h, 30);"])


def p_config(i):
    a = ["a", "holder", "hd", "obj", "ref"][i]
    return (
        ["Holder " + a, "Key k", "Sink out"],
        [f"out.put({a}.getConf().get(k));"],
        [f"out.put({a}.config().get(k));"],
    )


def p_literal(i):
    t = ["t", "timer", "tm", "clock", "tk"][i]
    return (["Timer " + t], [f"{t}.setDelay(100);"], [f"{t}.setDelay(500);"])


def p_ready(i):
    q = ["q", "queue", "jobs", "work", "tasks"][i]
    return (
        ["Queue " + q],
        [f"{q}.run();"],
        [f"if ({q}.isReady()) {{", f"    {q}.run();", "}"],
    )


def p_extract(i):
    g = ["g", "pen", "brush", "p", "tool"][i]
    c = ["c", "color", "col", "shade", "tint"][i]
    return (
        ["Pen " + g, "Canvas cv"],
        [f"cv.draw({g}.getColor());"],
        [f"Color {c} = {g}.getColor();", f"cv.draw({c});"],
    )


def p_length(i):
    r = ["r", "rows", "tbl", "data", "grid"][i]
    return (
        ["Rows " + r, "Report rep"],
        [f"rep.total({r}.size);"],
        [f"rep.total({r}.length());"],
    )


def p_tag(i):
    m = ["m", "msg", "text", "line", "body"][i]
    return (
        ["Logger lg", "Message " + m],
        [f"lg.log({m});"],
        [f'lg.log("core", {m});'],
    )


def p_mode(i):
    k = ["k", "mode", "md", "state", "sel"][i]
    return (
        ["Mode " + k, "Screen scr"],
        [f"if ({k}.current() == 1) {{", "    scr.dim();", "}"],
        [f"if ({k}.current() != 1) {{", "    scr.dim();", "}"],
    )


def p_close(i):
    d = ["d", "db", "store", "conn", "repo"][i]
    return (
        ["Database " + d],
        [f"{d}.commit();"],
        [f"{d}.commit();", f"{d}.close();"],
    )


PATTERNS = [
    ("rename", p_rename, 3),
    ("guard", p_guard, 4),
    ("flush", p_flush, 5),
    ("timeout", p_timeout_arg, 3),
    ("config", p_config, 4),
    ("literal", p_literal, 5),
    ("ready", p_ready, 3),
    ("extract", p_extract, 4),
    ("length", p_length, 5),
    ("tag", p_tag, 3),
    ("mode", p_mode, 4),
    ("close", p_close, 5),
]


def main():
    if ROOT.exists():
        shutil.rmtree(ROOT)
    ROOT.mkdir(parents=True)
    manifest = {
        "format_version": 1,
        "description": "Synthetic regression corpus: twelve independent edit patterns with three to five changes each.",
        "signatures": SIGNATURES,
    }
    (ROOT / "corpus.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    for p, (name, gen, count) in enumerate(PATTERNS):
        for i in range(count):
            params, old, new = gen(i)
            params = params + ["Audit audit"]
            before = ctx(i, f"{name}-{i}")
            after = ["audit.done();"] if i % 2 else []
            mname = f"{name}{i}"
            d = ROOT / f"{p:02d}-{name}-{i}"
            d.mkdir()
            (d / "old.minij").write_text(method(mname, params, before + old + after))
            (d / "new.minij").write_text(method(mname, params, before + new + after))
            meta = {"methodId": f"src/{name.title()}.minij#{mname}", "time": 1000 * (i + 1) + p}
            (d / "meta.json").write_text(json.dumps(meta) + "\n")


if __name__ == "__main__":
    main()
