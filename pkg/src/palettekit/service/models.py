"""Pydantic models for the session protocol's JSON frames.

Client messages form a discriminated union on "type".  Frames that carry
pixel payloads (load, preview, layers, render) pair a JSON frame with one or
more binary WebSocket frames immediately after it.
"""

from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, Field, TypeAdapter

RgbTriple = Annotated[list[float], Field(min_length=3, max_length=3)]


class LoadMsg(BaseModel):
    type: Literal["load"]  # followed by one binary PNG frame


class AutoPaletteMsg(BaseModel):
    type: Literal["auto_palette"]
    rmse: float = 2.0  # 0-255 units, like the CLI flag


class SetPaletteMsg(BaseModel):
    type: Literal["set_palette"]
    colors: list[RgbTriple]


class AddColorMsg(BaseModel):
    type: Literal["add_color"]
    rgb: RgbTriple


class FitMsg(BaseModel):
    type: Literal["fit"]
    kinds: Optional[list[str]] = None


class HarmonizeMsg(BaseModel):
    type: Literal["harmonize"]
    kind: str = "auto"
    beta: float = 1.0


class LcMsg(BaseModel):
    type: Literal["lc"]
    kind: str
    hue_template: str = "auto"
    beta: float = 1.0


class ContrastMsg(BaseModel):
    type: Literal["contrast"]
    kind: str
    beta: float = 1.0


class RefPalette(BaseModel):
    colors: list[RgbTriple]


class TransferMsg(BaseModel):
    type: Literal["transfer"]
    mode: Literal["align", "transfer"]
    ref_palette: RefPalette


class GetLayersMsg(BaseModel):
    type: Literal["get_layers"]


class RenderMsg(BaseModel):
    type: Literal["render"]


class DebugMsg(BaseModel):
    type: Literal["debug"]


ClientMessage = Annotated[
    Union[
        LoadMsg,
        AutoPaletteMsg,
        SetPaletteMsg,
        AddColorMsg,
        FitMsg,
        HarmonizeMsg,
        LcMsg,
        ContrastMsg,
        TransferMsg,
        GetLayersMsg,
        RenderMsg,
        DebugMsg,
    ],
    Field(discriminator="type"),
]

client_message_adapter = TypeAdapter(ClientMessage)


class ReadyFrame(BaseModel):
    type: Literal["ready"] = "ready"
    palette: list[RgbTriple]
    q: int
    width: int
    height: int


class PaletteFrame(BaseModel):
    type: Literal["palette"] = "palette"
    colors: list[RgbTriple]
    role: str = "current"


class FitReportFrame(BaseModel):
    type: Literal["fit_report"] = "fit_report"
    kind: str
    alpha1: float
    alpha2: float
    distance: float


class PreviewFrame(BaseModel):
    type: Literal["preview"] = "preview"
    width: int
    height: int
    full: bool = False


class LayersFrame(BaseModel):
    type: Literal["layers"] = "layers"
    count: int
    width: int
    height: int


class DebugFrame(BaseModel):
    type: Literal["debug"] = "debug"
    precompute_count: int
    q: int


class ErrorFrame(BaseModel):
    type: Literal["error"] = "error"
    code: str
    message: str
