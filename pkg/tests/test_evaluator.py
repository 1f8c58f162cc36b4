from decimal import Decimal

import pytest

from lazylab.environments import Val
from lazylab.errors import (
    ArityError,
    CyclicForceError,
    DivisionByZeroError,
    LazyLabError,
    MissingArgError,
    TypeMismatchError,
    UnboundNameError,
)
from lazylab.evaluator import (
    Closure,
    FunclangRun,
    Num,
    Strategy,
    Vec,
    run_program,
)
from lazylab.promises import PromiseState
from lazylab.syntax import parse_source
from lazylab.trace import EventKind


def run(source, strategy=Strategy.NEED):
    return run_program(parse_source(source), strategy)


def run_full(source, strategy=Strategy.NEED):
    r = FunclangRun(strategy)
    out = r.run(parse_source(source))
    return r, out


class TestGoldenPrograms:
    def test_defaults_see_body_assignments_under_need(self, r_prog1_listing):
        out = run(r_prog1_listing, Strategy.NEED)
        assert out.lines == []
        assert out.result == Vec((Decimal(2), Decimal(20), Decimal(7)))

    def test_print_wrapped_call_emits_golden_line(self):
        src = "f <- function(x=5, y=x*10, z=a+b){\n x = 2\n a = 3\n b = 4\n c(x, y, z)\n}\nprint(f())\n"
        assert run(src, Strategy.NEED).lines == ["2 20 7"]

    def test_need_caches_across_reassignment(self, r_prog2_listing):
        assert run(r_prog2_listing, Strategy.NEED).lines == ["20", "20"]

    def test_name_reevaluates_after_reassignment(self, r_prog2_listing):
        assert run(r_prog2_listing, Strategy.NAME).lines == ["20", "100"]

    def test_strict_evaluates_defaults_at_call_time(self, r_prog2_listing):
        # x=5 binds first, so y's default sees 5, not the body's 2 or 10
        assert run(r_prog2_listing, Strategy.STRICT).lines == ["50", "50"]

    def test_strict_fails_on_forward_looking_default(self, r_prog1_listing):
        with pytest.raises(UnboundNameError) as exc:
            run(r_prog1_listing, Strategy.STRICT)
        assert exc.value.name == "a"

    def test_global_call_creates_and_discards_one_frame(self, env_lifecycle_program):
        r, _ = run_full(env_lifecycle_program, Strategy.NEED)
        g = r.envs.global_id
        bindings = r.envs.bindings_of(g)
        assert set(bindings) == {"y", "h", "z"}
        assert bindings["y"] == Val(Num(Decimal(6)))
        assert isinstance(bindings["h"].value, Closure)
        assert bindings["z"] == Val(Num(Decimal(3)))
        created = r.trace.of_kind(EventKind.ENV_CREATED)
        discarded = r.trace.of_kind(EventKind.ENV_DISCARDED)
        assert len(created) == len(discarded) == 1
        assert created[0].subject == discarded[0].subject
        assert created[0].ord < discarded[0].ord


class TestStrategies:
    def test_arithmetic_agrees_everywhere(self):
        for strategy in Strategy:
            out = run("print(1 + 2)", strategy)
            assert out.lines == ["3"]

    def test_unused_unbound_default_is_harmless_when_lazy(self):
        src = "f <- function(x=5, y=x*10, z=a+b){\n x = 2\n print(c(x, y))\n}\nf()\n"
        assert run(src, Strategy.NEED).lines == ["2 20"]
        assert run(src, Strategy.NAME).lines == ["2 20"]
        with pytest.raises(UnboundNameError):
            run(src, Strategy.STRICT)

    def test_need_forces_at_most_once(self):
        src = "f <- function(v = 1 + 1){ print(v)\n print(v)\n print(v)\n v }\nf()\n"
        r, out = run_full(src, Strategy.NEED)
        assert out.lines == ["2", "2", "2"]
        assert r.trace.count(EventKind.PROMISE_FORCED) == 1
        assert r.trace.count(EventKind.PROMISE_CACHE_HIT) == 3  # 3 prints + return read

    def test_name_reevaluates_every_read(self):
        src = "f <- function(v = 1 + 1){ print(v)\n print(v)\n print(v)\n v }\nf()\n"
        r, out = run_full(src, Strategy.NAME)
        assert out.lines == ["2", "2", "2"]
        assert r.trace.count(EventKind.NAME_REEVAL) == 4  # 3 prints + return
        assert r.trace.count(EventKind.PROMISE_FORCED) == 0
        assert r.promises.forced_value_slots() == 0

    def test_supplied_arguments_capture_the_caller(self):
        # the argument expression reads the caller's `a`, not the body's
        src = "a <- 1\nf <- function(p){ a <- 100\n print(p) }\nf(a + 1)\n"
        for strategy in Strategy:
            assert run(src, strategy).lines == ["2"]

    def test_cyclic_defaults_detected_under_need(self):
        src = "f <- function(x=y, y=x){ x }\nf()\n"
        with pytest.raises(CyclicForceError):
            run(src, Strategy.NEED)

    def test_cyclic_defaults_detected_under_name(self):
        src = "f <- function(x=y, y=x){ x }\nf()\n"
        with pytest.raises(CyclicForceError):
            run(src, Strategy.NAME)


class TestCalls:
    def test_named_then_positional_matching(self):
        src = "f <- function(x, y, z){ c(x, y, z) }\nprint(f(z = 3, 1, 2))\n"
        assert run(src).lines == ["1 2 3"]

    def test_unknown_named_argument(self):
        with pytest.raises(ArityError):
            run("f <- function(x){ x }\nf(q = 1)\n")

    def test_too_many_positional_arguments(self):
        with pytest.raises(ArityError):
            run("f <- function(x){ x }\nf(1, 2)\n")

    def test_missing_argument_errors_only_when_read(self):
        assert run("f <- function(a){ 1 }\nprint(f())\n").lines == ["1"]
        with pytest.raises(MissingArgError) as exc:
            run("f <- function(a){ a + 1 }\nf()\n")
        assert exc.value.name == "a"

    def test_defaults_may_use_earlier_parameters(self):
        src = "f <- function(a, b = a * 2){ b }\nprint(f(3))\n"
        for strategy in Strategy:
            assert run(src, strategy).lines == ["6"]

    def test_closures_capture_their_definition_env(self):
        src = "k <- 10\nf <- function(n){ n + k }\nk2 <- 99\nprint(f(1))\n"
        assert run(src, Strategy.STRICT).lines == ["11"]

    def test_escaped_closure_cannot_outlive_its_frame(self):
        # execution environments are discarded on return, so a closure that
        # escapes its defining call has no live frame to attach to
        from lazylab.errors import DiscardedEnvError
        src = "mk <- function(n){ function(m){ n + m } }\nadd <- mk(1)\nadd(2)\n"
        with pytest.raises(DiscardedEnvError):
            run(src, Strategy.STRICT)

    def test_calling_a_number_is_a_type_error(self):
        with pytest.raises(TypeMismatchError):
            run("x <- 1\nx(2)\n")


class TestValuesAndPrinting:
    def test_vector_flattening(self):
        assert run("print(c(c(1, 2), 3))").lines == ["1 2 3"]

    def test_empty_vector_prints_empty_line(self):
        assert run("print(c())").lines == [""]

    def test_decimal_printing(self):
        assert run("print(2.50)").lines == ["2.5"]
        assert run("print(7 / 2)").lines == ["3.5"]
        assert run("print(6 / 3)").lines == ["2"]
        assert run("print(1 - 1)").lines == ["0"]

    def test_division_by_zero(self):
        with pytest.raises(DivisionByZeroError):
            run("print(1 / 0)")

    def test_arithmetic_on_closure_rejected(self):
        with pytest.raises(TypeMismatchError):
            run("f <- function(x){ x }\nf + 1\n")

    def test_arithmetic_on_vector_rejected(self):
        with pytest.raises(TypeMismatchError):
            run("c(1, 2) + 1\n")

    def test_result_is_last_expression_statement(self):
        out = run("x <- 1\nx + 1\n")
        assert out.result == Num(Decimal(2))
        out = run("x <- 1\n")
        assert out.result is None


class TestRunHygiene:
    def test_all_execution_envs_discarded(self):
        src = "mk <- function(n){ n * 2 }\nouter <- function(a = mk(2)){ a + mk(3) }\nprint(outer())\n"
        r, out = run_full(src, Strategy.NEED)
        assert out.lines == ["10"]
        assert r.trace.count(EventKind.ENV_CREATED) == r.trace.count(EventKind.ENV_DISCARDED) == 3

    def test_envs_discarded_even_when_the_body_fails(self):
        src = "f <- function(x){ nosuch }\nf(1)\n"
        r = FunclangRun(Strategy.NEED)
        with pytest.raises(UnboundNameError):
            r.run(parse_source(src))
        assert r.trace.count(EventKind.ENV_CREATED) == r.trace.count(EventKind.ENV_DISCARDED) == 1

    def test_runtime_errors_carry_positions(self):
        with pytest.raises(LazyLabError) as exc:
            run("x <- 1\ny <- nosuch + 1\n")
        assert (exc.value.line, exc.value.col) == (2, 6)

    def test_deterministic_replay(self, r_prog2_listing):
        r1, out1 = run_full(r_prog2_listing, Strategy.NEED)
        r2, out2 = run_full(r_prog2_listing, Strategy.NEED)
        assert out1.lines == out2.lines
        assert [(e.kind, e.subject, e.detail) for e in r1.trace.events] == \
               [(e.kind, e.subject, e.detail) for e in r2.trace.events]


class TestPromiseMetricsThroughRuns:
    def test_prog2_need_metrics_for_y(self, r_prog2_listing):
        r, _ = run_full(r_prog2_listing, Strategy.NEED)
        y_promises = [pid for pid in r.promises.ids() if r.promises.label(pid) == "y"]
        assert len(y_promises) == 1
        state, accesses, evaluations = r.promises.metrics(y_promises[0])
        assert state is PromiseState.FORCED
        assert (accesses, evaluations) == (2, 1)

    def test_never_read_argument_stays_untouched(self, r_prog1_listing):
        r, _ = run_full(r_prog1_listing, Strategy.NEED)
        x_promises = [pid for pid in r.promises.ids() if r.promises.label(pid) == "x"]
        assert len(x_promises) == 1
        assert r.promises.metrics(x_promises[0]) == (PromiseState.UNFORCED, 0, 0)
