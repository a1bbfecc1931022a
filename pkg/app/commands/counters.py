import click

from app.commands.common import new_report, reported
from app.models.machine import CounterKind
from app.schemas.counters import CounterParams, SystemCounterParams
from app.services import counters


@click.command("counter-trace", help="Состояния счётчика по шагам, одно на строку.")
@click.option("--kind", type=click.Choice([kind.value for kind in CounterKind]), required=True)
@click.option("--k", "k", type=click.IntRange(min=0, max=3), required=True, help="Показатель алфавита цифр")
@click.option("--w", "w", type=click.IntRange(min=1), required=True, help="Число разрядов")
@click.option("--steps", type=click.IntRange(min=1), required=True)
@reported
def counter_trace_command(kind: str, k: int, w: int, steps: int):
    report = new_report()
    if CounterKind(kind) == CounterKind.LINEAR:
        params = CounterParams(k=k, w=w)
        report.lines.append(counters.format_linear_state(counters.linear_zero(params), params))
        for state in counters.linear_run(params, steps):
            report.lines.append(counters.format_linear_state(state, params))
    else:
        params = SystemCounterParams(m=k, index_width=w, torus_width=w)
        report.lines.append(counters.format_system_state(counters.system_zero(params)))
        for state in counters.system_states(params, steps):
            report.lines.append(counters.format_system_state(state))
    return report
