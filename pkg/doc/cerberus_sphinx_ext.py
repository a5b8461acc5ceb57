"""
Sphinx directive that renders a cerberus schema from ``pyxbar.validate`` as a table.

Usage::

    .. cerberus-schema:: Design file
       :module: pyxbar.validate
       :schema: DESIGN_SCHEMA
"""

import importlib

from docutils import nodes
from sphinx.util.docutils import SphinxDirective

COLUMNS = ("Field", "Type", "Required", "Constraints")


def _field_type(rules):
    if not isinstance(rules, dict):
        return str(rules)
    if "oneof" in rules:
        return " or ".join(_field_type(r) for r in rules["oneof"])
    base = rules.get("type", "any")
    if base == "list" and isinstance(rules.get("schema"), dict):
        return f"list of {_field_type(rules['schema'])}"
    if base == "dict" and "valuesrules" in rules:
        return f"mapping of name to {_field_type(rules['valuesrules'])}"
    return base


def _constraints(rules):
    if not isinstance(rules, dict):
        return ""
    found = []
    if rules.get("positive"):
        found.append("> 0")
    if "min" in rules:
        found.append(f">= {rules['min']}")
    if "max" in rules:
        found.append(f"<= {rules['max']}")
    if "minlength" in rules:
        found.append(f"at least {rules['minlength']} entries")
    if "allowed" in rules:
        found.append("one of " + ", ".join(map(str, rules["allowed"])))
    if "regex" in rules:
        found.append(f"matches ``{rules['regex']}``")
    if "schema_version" in rules:
        found.append(f"must equal {rules['schema_version']}")
    if isinstance(rules.get("schema"), dict) and rules["schema"].get("is_interval"):
        found.append("each entry is [lo, hi] with 0 < lo < hi")
    return "; ".join(found)


def _nested(rules):
    """The sub-schema whose fields are listed below ``rules``, if any"""
    if not isinstance(rules, dict):
        return None
    for holder in (rules, rules.get("schema"), rules.get("valuesrules")):
        if not isinstance(holder, dict):
            continue
        inner = holder.get("schema")
        if holder.get("type") == "dict" and isinstance(inner, dict):
            return inner
    return None


def _rows(schema, prefix=""):
    for key, rules in schema.items():
        name = f"{prefix}.{key}" if prefix else key
        required = "yes" if isinstance(rules, dict) and rules.get("required") else ""
        yield name, _field_type(rules), required, _constraints(rules)
        nested = _nested(rules)
        if nested is not None:
            marker = "*" if isinstance(rules, dict) and "valuesrules" in rules else ""
            yield from _rows(nested, f"{name}.{marker}" if marker else name)


class CerberusSchemaDirective(SphinxDirective):
    has_content = False
    required_arguments = 1
    final_argument_whitespace = True
    option_spec = {"module": str, "schema": str}

    def _error(self, text):
        return [nodes.error(None, nodes.paragraph(text=f"{self.arguments[0]}: {text}"))]

    def run(self):
        module_name = self.options.get("module", "pyxbar.validate")
        try:
            module = importlib.import_module(module_name)
            schema = getattr(module, self.options["schema"])
            module.PyxbarValidator(schema)
        except Exception as e:
            return self._error(f"cannot load schema ({type(e).__name__}: {e})")

        table = nodes.table()
        tgroup = nodes.tgroup(cols=len(COLUMNS))
        table += tgroup
        for width in (3, 2, 1, 4):
            tgroup += nodes.colspec(colwidth=width)
        thead = nodes.thead()
        tgroup += thead
        header = nodes.row()
        thead += header
        for title in COLUMNS:
            header += nodes.entry("", nodes.paragraph(text=title))
        tbody = nodes.tbody()
        tgroup += tbody
        for cells in _rows(schema):
            row = nodes.row()
            for text in cells:
                row += nodes.entry("", nodes.paragraph(text=text))
            tbody += row

        section = nodes.section(ids=[nodes.make_id(self.arguments[0])])
        section += nodes.title(text=self.arguments[0])
        section += table
        return [section]


def setup(app):
    app.add_directive("cerberus-schema", CerberusSchemaDirective)
    return {"version": "0.1", "parallel_read_safe": True}
