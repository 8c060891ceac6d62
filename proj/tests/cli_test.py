"""End-to-end checks of the icclab command-line tool.

usage: cli_test.py <icclab binary> <schema directory>
"""

import csv
import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema

BIN = sys.argv[1]
SCHEMAS = pathlib.Path(sys.argv[2])
REPORT_SCHEMA = json.loads((SCHEMAS / "report.schema.json").read_text())
TENSOR_SCHEMA = json.loads((SCHEMAS / "tensor.schema.json").read_text())
failures = []


def run(*args, env=None):
    return subprocess.run([BIN, *map(str, args)], capture_output=True, text=True, env=env)


def check(cond, what):
    print(("ok   " if cond else "FAIL ") + what)
    if not cond:
        failures.append(what)


def report(*args, expect=0):
    proc = run(*args)
    check(proc.returncode == expect, f"{' '.join(map(str, args))} exits {expect} (got {proc.returncode})")
    doc = json.loads(proc.stdout)
    try:
        jsonschema.validate(doc, REPORT_SCHEMA)
        check(True, f"{args[0]} report matches schema")
    except jsonschema.ValidationError as e:
        check(False, f"{args[0]} report matches schema: {e.message}")
    return proc.stdout, doc


def without_timing(text):
    doc = json.loads(text)
    doc.pop("timing")
    return json.dumps(doc, sort_keys=True)


with tempfile.TemporaryDirectory() as tmp:
    d = pathlib.Path(tmp)
    for kind, name, param in [("sphere", "s5", 1), ("cylinder", "c5", 1), ("perturbed_cylinder", "pc5", 0.05)]:
        path = d / f"{name}.json"
        check(run("make-tensor", kind, "--dim", 5, "--param", param, "--out", path).returncode == 0, f"make {name}")
        jsonschema.validate(json.loads(path.read_text()), TENSOR_SCHEMA)
    s5, c5, pc5 = d / "s5.json", d / "c5.json", d / "pc5.json"
    run("make-tensor", "sphere", "--dim", 9, "--out", d / "s9.json")
    run("make-tensor", "cylinder", "--dim", 9, "--out", d / "c9.json")

    text, doc = report("classify", s5)
    margins = [m["margin"] for m in doc["result"]["margins"]]
    check(all(abs(a - b) < 1e-6 for a, b in zip(margins, [4, 2, 1])), "sphere margins 4/2/1")
    check([m["verdict"] for m in doc["result"]["margins"]] == ["interior"] * 3, "sphere verdicts interior")
    check(len(doc["input"]["sha1"]) == 40, "input hash recorded")
    again = run("classify", s5).stdout
    check(without_timing(text) == without_timing(again), "classify is deterministic modulo timing")

    _, doc = report("classify", c5, "--theta", 0.01)
    check([m["verdict"] for m in doc["result"]["margins"]] == ["interior", "weak", "weak"], "cylinder verdicts")

    _, doc = report("p1", pc5)
    check(doc["result"]["value"] < 0, "perturbed cylinder p1 < 0")

    proc = run("flow", s5, "--t-end", 0.1125, "--cones", "PIC")
    check(proc.returncode == 0, "flow exits 0")
    rows = list(csv.DictReader(proc.stdout.splitlines()))
    worst = max(abs(float(r["scal"]) / (20.0 / (1 - 8 * float(r["t"]))) - 1) for r in rows)
    check(worst <= 1e-6, f"flow scal matches the closed form (worst relative error {worst:.2e})")
    report("flow", s5, "--t-end", 0.05, "--format", "json")

    for name in ("s9", "c9"):
        text, doc = report("pipeline", d / f"{name}.json")
        check(doc["result"]["admissible_b"] is not None, f"pipeline finds an admissible b for {name}")
        again = run("pipeline", d / f"{name}.json").stdout
        check(without_timing(text) == without_timing(again), f"pipeline on {name} is deterministic")

    _, doc = report("lemma31", "--count", 4, "--seed", 5)
    check(doc["result"]["summary"]["violations"] == 0, "lemma31 corpus has no violations")
    _, doc = report("models", "--samples", 5)
    check(doc["result"]["max_residual"] <= 1e-12, "model residuals within 1e-12")

    cfg = d / "cfg.json"
    cfg.write_text(json.dumps({"seed": 7, "budget": {"restarts": 8}}))
    _, doc = report("classify", s5, "--config", cfg, "--budget-iters", 300)
    check(doc["config"]["seed"] == 7 and doc["config"]["budget"]["restarts"] == 8, "config file applied")
    check(doc["config"]["budget"]["iterations"] == 300, "flags override the config file")
    env = {"ICCLAB_SEED": "99", "PATH": "/usr/bin:/bin"}
    doc = json.loads(run("classify", s5, env=env).stdout)
    check(doc["config"]["seed"] == 99, "ICCLAB_SEED sets the default seed")

    bad = d / "bad.json"
    bad.write_text("{bad")
    proc = run("classify", bad)
    check(proc.returncode == 1 and proc.stdout == "", "malformed JSON exits 1 without a report")
    check(run("classify", d / "missing.json").returncode == 1, "missing file exits 1")
    check(run("p1", c5).returncode == 0, "cylinder p1 accepted")
    zero = d / "z.json"
    run("make-tensor", "zero", "--dim", 5, "--out", zero)
    check(run("p1", zero).returncode == 1, "p1 on a non-PIC tensor exits 1")
    check(run("bogus").returncode == 1, "unknown subcommand exits 1")

if failures:
    print(f"{len(failures)} check(s) failed")
    sys.exit(1)
print("all CLI checks passed")
