"""The HTTP surface: POST /v1/answer -> {"answer": str}."""

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .backends import UnscriptedError


class AnswerRequest(BaseModel):
    instruction: str
    context: str
    question: str
    choices: list[str] = Field(min_length=1)


def create_app(backend) -> FastAPI:
    app = FastAPI(title="ssikit answer service", docs_url=None, redoc_url=None)

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        # the wire contract reserves 4xx for permanent client errors
        return JSONResponse(status_code=400, content={"error": "malformed request body"})

    @app.post("/v1/answer")
    def answer(request: AnswerRequest):
        try:
            value = backend.answer(
                request.instruction, request.context, request.question, request.choices
            )
        except UnscriptedError as exc:
            return JSONResponse(status_code=422, content={"error": str(exc)})
        return {"answer": value}

    return app
