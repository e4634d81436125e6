"""OpenTelemetry tracing for trials, experiments and API requests.

Spans are always created through the ``dispersion`` tracer. They are only
exported when ``DISPERSION_TRACE_EXPORT=console``; otherwise the provider
drops them.

Usage:
    from observability import setup_tracing, tracer

    setup_tracing()
    with tracer.start_as_current_span("run_trial") as span:
        span.set_attribute("n", 1000)
"""

from opentelemetry import trace
from opentelemetry.sdk.resources import Resource
from opentelemetry.sdk.trace import TracerProvider
from opentelemetry.sdk.trace.export import ConsoleSpanExporter, SimpleSpanProcessor

from config import config

SERVICE_NAME = "dispersion-lab"

_configured = False

tracer = trace.get_tracer("dispersion")


def setup_tracing(exporter: str | None = None) -> bool:
    """Install the tracer provider once. Returns True if spans are exported."""
    global _configured
    exporter = (exporter or config.trace_export).lower()
    if _configured:
        return exporter == "console"

    provider = TracerProvider(resource=Resource.create({"service.name": SERVICE_NAME}))
    if exporter == "console":
        provider.add_span_processor(SimpleSpanProcessor(ConsoleSpanExporter()))
    elif exporter != "none":
        print(f"⚠️  Unknown DISPERSION_TRACE_EXPORT={exporter!r}, spans will not be exported")
    trace.set_tracer_provider(provider)
    _configured = True
    return exporter == "console"


__all__ = ["tracer", "setup_tracing"]
