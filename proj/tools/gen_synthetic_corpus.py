#!/usr/bin/env python3
# Copyright 2026 The mdlfuzz Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Writes a deterministic corpus of flat, export-style .mdl models.

Models use primitive blocks only and carry the clutter that tool exports
have: layout parameters, SIDs, defaults sections, annotations, branched
lines. Some contain feedback loops or unconnected blocks.

    gen_synthetic_corpus.py OUT_DIR [--count 50] [--seed 2026]
"""

import argparse
import os
import random

SOURCES = {
    "Sin": [("SineType", '"Time based"'), ("Amplitude", '"1"'), ("Bias", '"0"'),
            ("Frequency", '"1"'), ("Phase", '"0"'), ("SampleTime", '"0"')],
    "Constant": [("Value", '"1"')],
    "Step": [("Time", '"1"'), ("Before", '"0"'), ("After", '"1"'),
             ("SampleTime", '"0"')],
    "Clock": [("DisplayTime", "off"), ("Decimation", '"10"')],
    "Ramp": [("slope", '"1"'), ("start", '"0"'), ("InitialOutput", '"0"')],
    "Inport": [("Port", '"1"'), ("IconDisplay", '"Port number"')],
}
UNARY = {
    "Gain": [("Gain", '"2"'), ("Multiplication", '"Element-wise(K.*u)"')],
    "Abs": [("ZeroCross", "on")],
    "Saturation": [("UpperLimit", '"0.5"'), ("LowerLimit", '"-0.5"')],
    "UnitDelay": [("InitialCondition", '"0"'), ("SampleTime", '"-1"')],
    "Integrator": [("InitialCondition", '"0"')],
    "Trigonometry": [("Operator", "sin")],
}
BINARY = {
    "Sum": [("IconShape", '"round"'), ("Inputs", '"|++"')],
    "Product": [("Inputs", '"2"')],
}
SINKS = {
    "Scope": [("Floating", "off"), ("NumInputPorts", '"1"'),
              ("TimeRange", '"auto"'), ("YMin", '"-5"'), ("YMax", '"5"'),
              ("SaveFormat", '"StructureWithTime"')],
    "Display": [("Format", '"short"'), ("Decimation", '"1"')],
    "Terminator": [],
    "Outport": [("Port", '"1"'), ("IconDisplay", '"Port number"')],
}
BASE_NAMES = {
    "Sin": "Sine Wave", "Constant": "Constant", "Step": "Step", "Clock": "Clock",
    "Ramp": "Ramp", "Inport": "In", "Gain": "Gain", "Abs": "Abs",
    "Saturation": "Saturation", "UnitDelay": "Unit Delay",
    "Integrator": "Integrator", "Trigonometry": "Trigonometric Function",
    "Sum": "Sum", "Product": "Product", "Scope": "Scope", "Display": "Display",
    "Terminator": "Terminator", "Outport": "Out",
}


class Model:
    def __init__(self, rng):
        self.rng = rng
        self.blocks = []  # (name, type, n_in, n_out, params)
        self.wires = []  # (src, src_port, dst, dst_port)
        self.used = {}

    def add(self, block_type, n_in, n_out, params):
        base = BASE_NAMES[block_type]
        count = self.used.get(base, 0)
        self.used[base] = count + 1
        name = base if count == 0 else f"{base}{count}"
        self.blocks.append((name, block_type, n_in, n_out, list(params)))
        return name

    def wire(self, src, dst, dst_port):
        self.wires.append((src, 1, dst, dst_port))


def build(rng):
    # Small tutorial-sized diagrams: a source, a short processing chain, one
    # or two sinks.
    m = Model(rng)
    t = rng.choice(sorted(SOURCES))
    outputs = [m.add(t, 0, 1, SOURCES[t])]
    for _ in range(rng.randint(0, 2)):
        if rng.random() < 0.2:
            t = rng.choice(sorted(BINARY))
            name = m.add(t, 2, 1, BINARY[t])
            m.wire(outputs[-1], name, 1)
            m.wire(rng.choice(outputs), name, 2)
        else:
            t = rng.choice(sorted(UNARY))
            name = m.add(t, 1, 1, UNARY[t])
            m.wire(outputs[-1], name, 1)
        outputs.append(name)
    if rng.random() < 0.15:
        # Feedback loop through a delay.
        s = m.add("Sum", 2, 1, BINARY["Sum"])
        d = m.add("UnitDelay", 1, 1, UNARY["UnitDelay"])
        m.wire(outputs[-1], s, 1)
        m.wire(d, s, 2)
        m.wire(s, d, 1)
        outputs.append(s)
    for _ in range(1 if rng.random() < 0.7 else 2):
        t = rng.choice(sorted(SINKS))
        name = m.add(t, 1, 0, SINKS[t])
        m.wire(outputs[-1], name, 1)
    if rng.random() < 0.1:
        m.add("Constant", 0, 1, SOURCES["Constant"])  # left unconnected
    return m


def render(m, model_name, rng):
    out = []
    w = out.append
    w("# Exported model file")
    w("Model {")
    w(f'  Name\t\t\t  "{model_name}"')
    w("  Version\t\t  9.3")
    w('  SavedCharacterEncoding  "UTF-8"')
    w('  LastModifiedBy\t  "builder"')
    w('  LastModifiedDate\t  "Thu Mar 12 10:00:00 2026"')
    w('  ModelVersionFormat\t  "1.%<AutoIncrement:12>"')
    w("  SimulationMode\t  \"normal\"")
    w("  BlockDefaults {")
    w("    ForegroundColor\t    \"black\"")
    w("    BackgroundColor\t    \"white\"")
    w("    DropShadow\t\t    off")
    w("    NamePlacement\t    \"normal\"")
    w("    FontName\t\t    \"Helvetica\"")
    w("    FontSize\t\t    10")
    w("  }")
    w("  AnnotationDefaults {")
    w("    HorizontalAlignment\t    \"center\"")
    w("    FontName\t\t    \"Helvetica\"")
    w("  }")
    w("  LineDefaults {")
    w("    FontName\t\t    \"Helvetica\"")
    w("    FontSize\t\t    9")
    w("  }")
    w("  System {")
    w(f'    Name\t\t    "{model_name}"')
    w("    Location\t\t    [100, 100, 700, 500]")
    w("    Open\t\t    on")
    w('    ScreenColor\t\t    "white"')
    w('    PaperOrientation\t    "landscape"')
    w('    PaperType\t\t    "usletter"')
    w('    ZoomFactor\t\t    "100"')
    w(f"    SIDHighWatermark\t    \"{len(m.blocks) + len(m.wires)}\"")
    for i, (name, btype, n_in, n_out, params) in enumerate(m.blocks):
        x, y = 40 + 90 * (i % 6), 40 + 70 * (i // 6)
        w("    Block {")
        w(f"      BlockType\t      {btype}")
        w(f'      Name\t\t      "{name}"')
        w(f'      SID\t\t      "{i + 1}"')
        if btype not in ("Inport", "Outport"):
            ports = f"[{n_in}, {n_out}]" if n_out else f"[{n_in}]"
            w(f"      Ports\t\t      {ports}")
        w(f"      Position\t\t      [{x}, {y}, {x + 30}, {y + 30}]")
        w(f"      ZOrder\t\t      {i + 1}")
        if rng.random() < 0.3:
            w('      BackgroundColor\t      "yellow"')
        if rng.random() < 0.2:
            w("      NamePlacement\t      \"alternate\"")
        for key, value in params:
            w(f"      {key}\t\t      {value}")
        w("    }")
    # One Line per source port; extra destinations become branches.
    by_src = {}
    for src, sp, dst, dp in m.wires:
        by_src.setdefault((src, sp), []).append((dst, dp))
    z = len(m.blocks)
    for (src, sp), dsts in by_src.items():
        z += 1
        w("    Line {")
        w(f"      ZOrder\t\t      {z}")
        w(f'      SrcBlock\t\t      "{src}"')
        w(f"      SrcPort\t\t      {sp}")
        if len(dsts) == 1:
            w("      Points\t\t      [20, 0]")
            w(f'      DstBlock\t\t      "{dsts[0][0]}"')
            w(f"      DstPort\t\t      {dsts[0][1]}")
        else:
            w("      Points\t\t      [15, 0]")
            for dst, dp in dsts:
                z += 1
                w("      Branch {")
                w(f"\tZOrder\t\t\t{z}")
                w("\tPoints\t\t\t[0, 25; 20, 0]")
                w(f'\tDstBlock\t\t"{dst}"')
                w(f"\tDstPort\t\t\t{dp}")
                w("      }")
        w("    }")
    if rng.random() < 0.6:
        w("    Annotation {")
        w(f'      Name\t\t      "{model_name} demo"')
        w("      Position\t\t      [300, 20]")
        w("      ZOrder\t\t      -1")
        w("      FontSize\t\t      12")
        w("    }")
    w("  }")
    w("}")
    return "\n".join(out) + "\n"


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("out_dir")
    parser.add_argument("--count", type=int, default=50)
    parser.add_argument("--seed", type=int, default=2026)
    parser.add_argument("--prefix", default="synth")
    args = parser.parse_args()
    rng = random.Random(args.seed)
    os.makedirs(args.out_dir, exist_ok=True)
    for i in range(args.count):
        name = f"{args.prefix}_{i + 1:03d}"
        text = render(build(rng), name, rng)
        with open(os.path.join(args.out_dir, name + ".mdl"), "w",
                  encoding="utf-8", newline="\n") as f:
            f.write(text)


if __name__ == "__main__":
    main()
