"""Hypothesis strategies producing small, valid, recursion-free MOL programs.

Methods only call earlier methods, so the oracle never has to cut recursion.
With ``single_null=True`` every call passes at most one parameter-derived
argument and never the null literal, which keeps every call inside the
one-null hypothesis the analysis summarizes. It also confines ``fail`` and
null-literal dereferences to ``if p == null`` branches, so no method can fail
once all of its reference arguments are objects.
"""

from hypothesis import strategies as st


@st.composite
def programs(draw, max_methods=4, single_null=True, loops=False, max_stmts=4):
    n_methods = draw(st.integers(1, max_methods))
    sigs = []
    out = ["classifier C;"]
    for mi in range(n_methods):
        arity = draw(st.integers(1, 2))
        params = [f"p{i}" for i in range(arity)]
        counter = [0]
        lines = []

        def fresh():
            counter[0] += 1
            return f"t{counter[0]}"

        def block(depth, aliases, indent, guarded=False):
            stmts = []
            free_fail = guarded or not single_null
            for _ in range(draw(st.integers(0, max_stmts))):
                choices = ["deref", "alias"] + (["nulllocal"] if free_fail else [])
                if sigs:
                    choices.append("call")
                if depth < 2:
                    choices += ["ifopaque", "ifnull", "ifnotnull"]
                    if loops:
                        choices.append("while")
                choices += ["fail", "return"] if free_fail else ["return"]
                kind = draw(st.sampled_from(choices))
                pad = "  " * indent
                if kind == "deref":
                    stmts.append(f"{pad}deref {draw(st.sampled_from(sorted(aliases)))};")
                elif kind == "alias":
                    v = fresh()
                    stmts.append(f"{pad}{v} = {draw(st.sampled_from(sorted(aliases)))};")
                    aliases = aliases | {v}
                elif kind == "nulllocal":
                    v = fresh()
                    stmts.append(f"{pad}{v} = null;")
                    if draw(st.booleans()):
                        stmts.append(f"{pad}deref {v};")
                elif kind == "call":
                    name, carity = draw(st.sampled_from(sigs))
                    args = []
                    src_pos = draw(st.integers(0, carity - 1))
                    for j in range(carity):
                        if j == src_pos:
                            args.append(draw(st.sampled_from(sorted(aliases))))
                        elif not single_null and draw(st.booleans()):
                            args.append(draw(st.sampled_from(sorted(aliases) + ["null"])))
                        else:
                            v = fresh()
                            stmts.append(f"{pad}{v} = new C;")
                            args.append(v)
                    stmts.append(f"{pad}call {name}({', '.join(args)});")
                elif kind in ("ifopaque", "ifnull", "ifnotnull", "while"):
                    if kind == "ifopaque":
                        head = "if opaque"
                    elif kind == "while":
                        head = "while opaque"
                    else:
                        op = "==" if kind == "ifnull" else "!="
                        head = f"if {draw(st.sampled_from(params))} {op} null"
                    stmts.append(f"{pad}{head} {{")
                    stmts.extend(block(depth + 1, aliases, indent + 1, guarded or kind == "ifnull"))
                    if kind != "while" and draw(st.booleans()):
                        stmts.append(f"{pad}}} else {{")
                        stmts.extend(block(depth + 1, aliases, indent + 1, guarded))
                    stmts.append(f"{pad}}}")
                elif kind == "fail":
                    stmts.append(f"{pad}fail;")
                    break
                else:
                    stmts.append(f"{pad}return;")
                    break
            return stmts

        lines.extend(block(0, frozenset(params), 1))
        plist = ", ".join(f"{draw(st.sampled_from(['req', 'opt']))} {p}: C" for p in params)
        out.append(f"method m{mi}({plist}) {{")
        out.extend(lines)
        out.append("}")
        sigs.append((f"m{mi}", arity))
    return "\n".join(out) + "\n"
