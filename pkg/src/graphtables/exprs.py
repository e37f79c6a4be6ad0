"""Expression evaluation shared by the matcher, the executor and commit-time
constraint checks.  Three-valued logic in the SQL style: None propagates
through comparisons and arithmetic, AND/OR/NOT treat it as unknown."""

from __future__ import annotations

import datetime
from decimal import Decimal

from .errors import ExecutionError
from .syntax import Binary, IsNull, Literal, Ref, Unary
from .values import Currency, values_equal

_NUM = (int, Decimal)


def _is_row(v) -> bool:
    return hasattr(v, "uid") and hasattr(v, "type_id")


def _ordering_pair(a, b):
    if isinstance(a, bool) or isinstance(b, bool):
        raise ExecutionError("booleans have no ordering")
    if isinstance(a, _NUM) and isinstance(b, _NUM):
        return Decimal(a), Decimal(b)
    if isinstance(a, Currency) and isinstance(b, Currency):
        if a.code != b.code:
            raise ExecutionError(f"cannot compare {a.code} with {b.code}")
        return a.amount, b.amount
    if isinstance(a, str) and isinstance(b, str):
        return a, b
    if isinstance(a, datetime.date) and isinstance(b, datetime.date):
        return a, b
    raise ExecutionError(f"cannot compare {a!r} with {b!r}")


def _equal(a, b):
    if _is_row(a) and _is_row(b):
        return a.uid == b.uid
    if _is_row(a) or _is_row(b):
        return False
    return values_equal(a, b)


def _arith(op: str, a, b):
    if isinstance(a, bool) or isinstance(b, bool):
        raise ExecutionError("arithmetic on booleans")
    if isinstance(a, Currency) and isinstance(b, Currency):
        if a.code != b.code:
            raise ExecutionError(f"cannot combine {a.code} with {b.code}")
        if op == "+":
            return Currency(a.amount + b.amount, a.code)
        if op == "-":
            return Currency(a.amount - b.amount, a.code)
        raise ExecutionError(f"unsupported currency operation {op}")
    if isinstance(a, Currency) or isinstance(b, Currency):
        cur, num = (a, b) if isinstance(a, Currency) else (b, a)
        if not isinstance(num, _NUM):
            raise ExecutionError("currency arithmetic needs a number")
        if op == "*":
            return Currency(cur.amount * Decimal(num), cur.code)
        if op == "/" and cur is a:
            return Currency(cur.amount / Decimal(num), cur.code)
        raise ExecutionError(f"unsupported currency operation {op}")
    if isinstance(a, _NUM) and isinstance(b, _NUM):
        if op == "/":
            if isinstance(a, int) and isinstance(b, int):
                if b == 0:
                    raise ExecutionError("division by zero")
                q, r = divmod(a, b)
                return q if r == 0 else Decimal(a) / Decimal(b)
            return Decimal(a) / Decimal(b)
        x = {"+": a + b, "-": a - b, "*": a * b}[op]
        return x
    if isinstance(a, str) and isinstance(b, str) and op == "+":
        return a + b
    raise ExecutionError(f"unsupported operands for {op}: {a!r}, {b!r}")


def eval_expr(expr, resolve):
    """`resolve(path: tuple[str, ...])` supplies identifier values."""
    if isinstance(expr, Literal):
        return expr.value
    if isinstance(expr, Ref):
        return resolve(expr.path)
    if isinstance(expr, Unary):
        v = eval_expr(expr.operand, resolve)
        if expr.op == "NOT":
            return None if v is None else (not _truthy(expr, v))
        if expr.op == "-":
            if v is None:
                return None
            if isinstance(v, bool) or not isinstance(v, _NUM):
                raise ExecutionError("unary minus needs a number")
            return -v
        raise ExecutionError(f"unknown operator {expr.op}")
    if isinstance(expr, IsNull):
        v = eval_expr(expr.operand, resolve)
        return (v is None) != expr.negated
    if isinstance(expr, Binary):
        op = expr.op
        if op in ("AND", "OR"):
            left = eval_expr(expr.left, resolve)
            left = None if left is None else _truthy(expr, left)
            right = eval_expr(expr.right, resolve)
            right = None if right is None else _truthy(expr, right)
            if op == "AND":
                if left is False or right is False:
                    return False
                if left is None or right is None:
                    return None
                return True
            if left is True or right is True:
                return True
            if left is None or right is None:
                return None
            return False
        left = eval_expr(expr.left, resolve)
        right = eval_expr(expr.right, resolve)
        if op in ("=", "<>"):
            if left is None or right is None:
                return None
            eq = _equal(left, right)
            return eq if op == "=" else not eq
        if op in ("<", "<=", ">", ">="):
            if left is None or right is None:
                return None
            a, b = _ordering_pair(left, right)
            return {"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[op]
        if op in ("+", "-", "*", "/"):
            if left is None or right is None:
                return None
            return _arith(op, left, right)
        raise ExecutionError(f"unknown operator {op}")
    raise ExecutionError(f"not an expression: {expr!r}")


def _truthy(expr, v) -> bool:
    if isinstance(v, bool):
        return v
    raise ExecutionError("condition did not evaluate to a boolean")


def eval_predicate(expr, resolve) -> bool:
    """Boolean context: unknown counts as not satisfied."""
    v = eval_expr(expr, resolve)
    if v is None:
        return False
    if not isinstance(v, bool):
        raise ExecutionError("predicate did not evaluate to a boolean")
    return v


def constraint_passes(expr, row_values: dict) -> bool:
    """Row constraint: only a definite False is a violation (SQL style)."""

    def resolve(path):
        if len(path) != 1:
            raise ExecutionError("constraints may only reference columns")
        return row_values.get(path[0])

    v = eval_expr(expr, resolve)
    if v is None:
        return True
    if not isinstance(v, bool):
        raise ExecutionError("constraint did not evaluate to a boolean")
    return v
