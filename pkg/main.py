"""FastAPI server for dispersion-lab.

Usage:
    python main.py

    # Or with uvicorn directly:
    uvicorn main:app --reload
"""

from contextlib import asynccontextmanager

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from api.routes import close_store, get_store, router
from config import config
from observability import setup_tracing
from process.errors import DispersionError, InvalidArgumentError, SupportTooLargeError


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Startup and shutdown events."""
    problems = config.validate()
    if problems:
        print("⚠️  Configuration problems:")
        for problem in problems:
            print(f"   - {problem}")
        print("\nFalling back to defaults where possible. See .env.example.")

    print("🚀 Starting dispersion-lab...")
    if setup_tracing():
        print("✓ Exporting spans to console")
    try:
        await get_store()
    except Exception as e:
        print(f"⚠️  Result store initialization failed: {e}")
        print("   API will start but experiments will not be stored.")

    yield

    print("Shutting down...")
    await close_store()


app = FastAPI(
    title="dispersion-lab",
    description="Seeded simulations of the synchronous dispersion process",
    version="1.0.0",
    lifespan=lifespan,
)

app.include_router(router)


@app.exception_handler(InvalidArgumentError)
@app.exception_handler(SupportTooLargeError)
async def invalid_argument_handler(request: Request, exc: DispersionError):
    return JSONResponse(status_code=422, content={"error": type(exc).__name__, "detail": str(exc)})


@app.exception_handler(DispersionError)
async def dispersion_error_handler(request: Request, exc: DispersionError):
    return JSONResponse(status_code=500, content={"error": type(exc).__name__, "detail": str(exc)})


@app.get("/health")
async def health():
    """Health check endpoint."""
    return {"status": "healthy"}


if __name__ == "__main__":
    import uvicorn

    print(f"\n🎲 dispersion-lab")
    print(f"   http://{config.host}:{config.port}\n")

    uvicorn.run(
        "main:app",
        host=config.host,
        port=config.port,
        reload=True,
    )
