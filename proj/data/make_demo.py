#!/usr/bin/env python3
"""Regenerates the demo corpus: sketch-style PNGs, gold models, canned
responses and the replay fixtures they are stored under.

Usage: python3 data/make_demo.py path/to/img2uml
"""

import json
import math
import random
import re
import subprocess
import sys
from pathlib import Path

from PIL import Image, ImageDraw, ImageFont

HERE = Path(__file__).resolve().parent
CLASS_RE = re.compile(r"^(abstract class|class|interface|enum|abstract)\s+(\w+)\s*(\{?)\s*$")
REL_RE = re.compile(r'^(\w+)\s*(?:"([^"]*)")?\s*(\S*[-.]\S*)\s*(?:"([^"]*)")?\s*(\w+)\s*(?::\s*(.*))?$')


def read_diagram(text):
    boxes, edges, current = {}, [], None
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("@"):
            continue
        if current is not None:
            if line == "}":
                current = None
            else:
                boxes[current]["members"].append(line)
            continue
        m = CLASS_RE.match(line)
        if m:
            kind, name, brace = m.groups()
            boxes[name] = {"kind": kind, "members": []}
            current = name if brace else None
            continue
        m = REL_RE.match(line)
        if m:
            left, lm, arrow, rm, right, label = m.groups()
            for n in (left, right):
                boxes.setdefault(n, {"kind": "class", "members": []})
            edges.append((left, lm, arrow, rm, right, label))
    return boxes, edges


def wobbly_line(draw, a, b, rng, width=3):
    steps = max(2, int(math.dist(a, b) / 25))
    points = []
    for i in range(steps + 1):
        t = i / steps
        jitter = 0 if i in (0, steps) else rng.uniform(-2.5, 2.5)
        points.append((a[0] + (b[0] - a[0]) * t + jitter, a[1] + (b[1] - a[1]) * t + jitter))
    draw.line(points, fill="black", width=width, joint="curve")


def clip(box, toward):
    (x0, y0, x1, y1) = box
    cx, cy = (x0 + x1) / 2, (y0 + y1) / 2
    dx, dy = toward[0] - cx, toward[1] - cy
    if dx == 0 and dy == 0:
        return cx, cy
    sx = (x1 - x0) / 2 / abs(dx) if dx else math.inf
    sy = (y1 - y0) / 2 / abs(dy) if dy else math.inf
    s = min(sx, sy)
    return cx + dx * s, cy + dy * s


def head(draw, tip, tail, shape):
    ang = math.atan2(tip[1] - tail[1], tip[0] - tail[0])
    def at(dist, off):
        return (tip[0] - dist * math.cos(ang) - off * math.sin(ang), tip[1] - dist * math.sin(ang) + off * math.cos(ang))
    if shape == "triangle":
        draw.polygon([tip, at(22, 11), at(22, -11)], outline="black", fill="white", width=3)
    elif shape in ("hollow", "filled"):
        pts = [tip, at(14, 8), at(28, 0), at(14, -8)]
        draw.polygon(pts, outline="black", fill="black" if shape == "filled" else "white", width=3)
    elif shape == "open":
        draw.line([at(18, 9), tip, at(18, -9)], fill="black", width=3)


def end_shape(marker):
    return {"<|": "triangle", "|>": "triangle", "o": "hollow", "*": "filled", "<": "open", ">": "open"}.get(marker)


def render(puml, out, seed):
    rng = random.Random(seed)
    boxes, edges = read_diagram(puml)
    font = ImageFont.load_default(size=20)
    cols = 3
    layout = {}
    for i, name in enumerate(boxes):
        b = boxes[name]
        lines = ([f"<<{b['kind']}>>"] if b["kind"] not in ("class",) else []) + [name]
        w = max(font.getlength(t) for t in lines + b["members"] + ["xxxxxxxx"]) + 30
        h = 30 * (len(lines) + len(b["members"])) + 30
        x = 60 + (i % cols) * 340 + rng.uniform(-15, 15)
        y = 60 + (i // cols) * 300 + rng.uniform(-15, 15)
        layout[name] = ((x, y, x + w, y + h), lines)
    width = int(max(v[0][2] for v in layout.values()) + 80)
    height = int(max(v[0][3] for v in layout.values()) + 80)
    img = Image.new("RGB", (width, height), (250, 248, 240))
    draw = ImageDraw.Draw(img)
    for name, ((x0, y0, x1, y1), lines) in layout.items():
        for a, b in (((x0, y0), (x1, y0)), ((x1, y0), (x1, y1)), ((x1, y1), (x0, y1)), ((x0, y1), (x0, y0))):
            wobbly_line(draw, a, b, rng)
        y = y0 + 10
        for t in lines:
            draw.text((x0 + 15, y), t, fill="black", font=font)
            y += 30
        if boxes[name]["members"]:
            wobbly_line(draw, (x0, y + 5), (x1, y + 5), rng, 2)
            y += 15
        for t in boxes[name]["members"]:
            draw.text((x0 + 15, y), t, fill="black", font=font)
            y += 30
    for left, lm, arrow, rm, right, label in edges:
        lb, rb = layout[left][0], layout[right][0]
        lc = ((lb[0] + lb[2]) / 2, (lb[1] + lb[3]) / 2)
        rc = ((rb[0] + rb[2]) / 2, (rb[1] + rb[3]) / 2)
        a, b = clip(lb, rc), clip(rb, lc)
        if "." in arrow:
            n = max(2, int(math.dist(a, b) / 14))
            for i in range(0, n, 2):
                p = (a[0] + (b[0] - a[0]) * i / n, a[1] + (b[1] - a[1]) * i / n)
                q = (a[0] + (b[0] - a[0]) * (i + 1) / n, a[1] + (b[1] - a[1]) * (i + 1) / n)
                draw.line([p, q], fill="black", width=3)
        else:
            wobbly_line(draw, a, b, rng)
        left_marker = next((m for m in ("<|", "o", "*", "<") if arrow.startswith(m)), None)
        right_marker = next((m for m in ("|>", "o", "*", ">") if arrow.endswith(m)), None)
        if left_marker:
            head(draw, a, b, end_shape(left_marker))
        if right_marker:
            head(draw, b, a, end_shape(right_marker))
        for mult, p, q in ((lm, a, b), (rm, b, a)):
            if mult:
                draw.text((p[0] + (q[0] - p[0]) * 0.12 + 8, p[1] + (q[1] - p[1]) * 0.12 - 24), mult, fill="black", font=font)
        if label:
            draw.text(((a[0] + b[0]) / 2 + 8, (a[1] + b[1]) / 2 - 26), label, fill="black", font=font)
    img = img.rotate(rng.uniform(-1.5, 1.5), expand=True, fillcolor=(250, 248, 240))
    img.save(out)


def response(puml, level, prompt, attempt):
    lines = puml.strip().splitlines()
    kind = (level + 2 * prompt + attempt) % 6
    if kind == 0:
        return "Here is the class diagram in PlantUML:\n\n```plantuml\n" + puml + "```\n"
    if kind == 1:
        return "\n".join(lines[:-1] + ["class Helper", "@enduml"]) + "\n"
    if kind == 2:
        rel = max(i for i, l in enumerate(lines) if REL_RE.match(l.strip()) and not CLASS_RE.match(l.strip()))
        return "```\n" + "\n".join(lines[:rel] + lines[rel + 1:]) + "\n```\n"
    if kind == 3:
        first = next(i for i, l in enumerate(lines) if CLASS_RE.match(l.strip()))
        name = CLASS_RE.match(lines[first].strip()).group(2)
        broken = lines[:first] + [name + "{"] + lines[first + 1:]
        return "```plantuml\n" + "\n".join(broken) + "\n```\n"
    if kind == 4:
        return ("I'm sorry, but I can't produce a class diagram from this image. The sketch does not "
                "appear to describe a meaningful domain.\n")
    member = next(i for i, l in enumerate(lines) if l.startswith("  "))
    return "\n".join(lines[:member] + lines[member + 1:]) + "\n"


def main():
    cli = Path(sys.argv[1]).resolve()
    for sub in ("images", "gold", "responses", "replay"):
        (HERE / sub).mkdir(exist_ok=True)
    for old in (HERE / "replay").glob("*"):
        old.unlink()
    for level in range(1, 5):
        name = f"level{level}"
        puml = (HERE / "puml" / f"{name}.puml").read_text()
        render(puml, HERE / "images" / f"{name}.png", seed=level)
        model = subprocess.run([cli, "--json", "parse", HERE / "puml" / f"{name}.puml"],
                               check=True, capture_output=True, text=True).stdout
        (HERE / "gold" / f"{name}.json").write_text(json.dumps(json.loads(model), indent=2) + "\n")
        for prompt in range(1, 4):
            for attempt in range(1, 4):
                resp = HERE / "responses" / f"{name}-p{prompt}-a{attempt}.txt"
                resp.write_text(response(puml, level, prompt, attempt))
                subprocess.run([cli, "--providers", HERE / "experiment.toml", "fixture", "put",
                                "--provider", "replay", "--image", HERE / "images" / f"{name}.png",
                                "--prompt", str(prompt), "--attempt", str(attempt), resp],
                               check=True, capture_output=True)


if __name__ == "__main__":
    main()
