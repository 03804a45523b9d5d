from docflow.engine.docset import Context, DocSet
from docflow.engine.executor import ExecutionResult, Executor, RunContext, RunCounters, write_trace_file
from docflow.engine.trace import ExecutionTrace, OperatorRecord, TraceRecorder, new_run_id

__all__ = [
    "Context",
    "DocSet",
    "ExecutionResult",
    "ExecutionTrace",
    "Executor",
    "OperatorRecord",
    "RunContext",
    "RunCounters",
    "TraceRecorder",
    "new_run_id",
    "write_trace_file",
]
