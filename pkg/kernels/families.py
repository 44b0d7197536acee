"""
Опис сімейств ядер у вигляді pydantic-моделей.

JSON-документ ядра:
    {"family": "product", "parts": [{"type": "exp", "rate": 1.0}, ...], "scale": 1.0}
    {"family": "orderk", "n": 3, "k": 2, "eta": [{"r": [1, 1, 1], "w": 1.0}], "cross": [...]}
    {"family": "sumcm", "n": 3, "ell": 2, "psi": {"type": "power", "ell": 2, "a": 1.5}}

Індекси змінних у "cross" нумеруються з нуля.
"""
import math
from typing import Annotated, Any, List, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError, model_validator
from scipy.special import xlogy

from common.errors import KernelSpecError


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


# --- одновимірні функції Бернштейна ---------------------------------------------

class ExpBernstein(_Model):
    """t ↦ 1 - e^{-rt}"""

    type: Literal["exp"] = "exp"
    rate: float = Field(gt=0, allow_inf_nan=False)

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        return -np.expm1(-self.rate * np.asarray(t, dtype=float))


class PowerBernstein(_Model):
    """t ↦ t^a, 0 < a ≤ 1"""

    type: Literal["power"] = "power"
    a: float = Field(gt=0, le=1)

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        return np.power(np.asarray(t, dtype=float), self.a)


class LogShiftBernstein(_Model):
    """t ↦ log(1 + t/c)"""

    type: Literal["logshift"] = "logshift"
    c: float = Field(gt=0, allow_inf_nan=False)

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        return np.log1p(np.asarray(t, dtype=float) / self.c)


Bernstein1D = Annotated[
    Union[ExpBernstein, PowerBernstein, LogShiftBernstein], Field(discriminator="type")
]


# --- сімейства CM_ℓ ----------------------------------------------------------------

def _check_exponent(ell: int, a: float) -> None:
    if not ell - 1 < a <= ell:
        raise ValueError(f"показник a={a} має лежати в ({ell - 1}, {ell}]")


class PowerCM(_Model):
    """ψ(t) = (-1)^ℓ t^a, a ∈ (ℓ-1, ℓ]"""

    type: Literal["power"] = "power"
    ell: int = Field(ge=1)
    a: float

    @model_validator(mode="after")
    def _exponent(self):
        _check_exponent(self.ell, self.a)
        return self

    def signed(self, t: np.ndarray, ell: int) -> np.ndarray:
        return np.power(np.asarray(t, dtype=float), self.a)


class LogCM(_Model):
    """ψ(t) = (-1)^ℓ t^{ℓ-1} log t, ℓ ≥ 2"""

    type: Literal["log"] = "log"
    ell: int = Field(ge=2)

    def signed(self, t: np.ndarray, ell: int) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return xlogy(np.power(t, self.ell - 1), t)


class ShiftPowerCM(_Model):
    """ψ(t) = (-1)^ℓ (c + t)^a, c > 0, a ∈ (ℓ-1, ℓ]"""

    type: Literal["shiftpower"] = "shiftpower"
    ell: int = Field(ge=1)
    c: float = Field(gt=0, allow_inf_nan=False)
    a: float

    @model_validator(mode="after")
    def _exponent(self):
        _check_exponent(self.ell, self.a)
        return self

    def signed(self, t: np.ndarray, ell: int) -> np.ndarray:
        return np.power(self.c + np.asarray(t, dtype=float), self.a)


class ExpCM(_Model):
    """ψ(t) = e^{-rt}; належить CM_ℓ для кожного ℓ."""

    type: Literal["exp"] = "exp"
    r: float = Field(gt=0, allow_inf_nan=False)

    def signed(self, t: np.ndarray, ell: int) -> np.ndarray:
        return (-1.0) ** ell * np.exp(-self.r * np.asarray(t, dtype=float))


CMFamily = Annotated[Union[PowerCM, LogCM, ShiftPowerCM, ExpCM], Field(discriminator="type")]


def cm_psi(psi: Any, ell: int):
    """Сама функція ψ (без множника (-1)^ℓ) як функція одного аргументу."""
    sign = (-1.0) ** ell
    return lambda t: sign * psi.signed(t, ell)


# --- специфікації ядер ---------------------------------------------------------------

class ProductSpec(_Model):
    """g(t) = scale · ∏ g_i(t_i); від'ємний scale дає навмисно некоректне ядро."""

    family: Literal["product"] = "product"
    parts: List[Bernstein1D] = Field(min_length=1)
    scale: float = Field(default=1.0, allow_inf_nan=False)

    @property
    def n(self) -> int:
        return len(self.parts)

    @property
    def order(self) -> int:
        return self.n


class EtaAtom(_Model):
    r: List[float]
    w: float = Field(gt=0, allow_inf_nan=False)

    @model_validator(mode="after")
    def _finite(self):
        if any(not math.isfinite(v) or v < 0 for v in self.r):
            raise ValueError(f"координати атома eta мають бути скінченними і невід'ємними: {self.r}")
        return self


class CrossTerm(_Model):
    """w · ∏_{i∈F} g_i(t_i) для підмножини F з k змінних."""

    subset: List[int]
    parts: List[Bernstein1D]
    w: float = Field(default=1.0, gt=0, allow_inf_nan=False)

    @model_validator(mode="after")
    def _consistent(self):
        if len(self.subset) != len(self.parts):
            raise ValueError("кількість функцій має збігатися з розміром підмножини")
        if len(set(self.subset)) != len(self.subset):
            raise ValueError(f"індекси підмножини {self.subset} повторюються")
        return self


class OrderKSpec(_Model):
    """Ядро порядку k: Σ_F ψ^F(t_F) + Σ_j w_j (-1)^k E_k^n(r_j ⊙ t) p_k^n(1 + r_j)/p_k^n(r_j)."""

    family: Literal["orderk"] = "orderk"
    n: int = Field(ge=2)
    k: int = Field(ge=1)
    eta: List[EtaAtom] = Field(default_factory=list)
    cross: List[CrossTerm] = Field(default_factory=list)

    @model_validator(mode="after")
    def _consistent(self):
        if self.k >= self.n:
            raise ValueError(f"порядок k={self.k} має бути меншим за n={self.n}")
        if not self.eta and not self.cross:
            raise ValueError("потрібен хоча б один атом eta або перехресний доданок")
        for atom in self.eta:
            if len(atom.r) != self.n:
                raise ValueError(f"атом eta має {len(atom.r)} координат, очікується {self.n}")
            positive = sum(1 for v in atom.r if v > 0)
            if positive < self.k + 1:
                raise ValueError(
                    f"атом eta потребує щонайменше {self.k + 1} додатних координат, знайдено {positive}"
                )
        for term in self.cross:
            if len(term.subset) != self.k:
                raise ValueError(f"перехресний доданок має {len(term.subset)} змінних, очікується {self.k}")
            if any(i < 0 or i >= self.n for i in term.subset):
                raise ValueError(f"індекси {term.subset} поза межами 0..{self.n - 1}")
        return self

    @property
    def order(self) -> int:
        return self.k


class SumCMSpec(_Model):
    """g(t) = (-1)^ℓ ψ(t_1 + … + t_n) з поправкою на межі порядку ℓ."""

    family: Literal["sumcm"] = "sumcm"
    n: int = Field(ge=1)
    ell: int = Field(ge=1)
    psi: CMFamily

    @model_validator(mode="after")
    def _consistent(self):
        if self.ell > self.n:
            raise ValueError(f"ℓ={self.ell} не може перевищувати n={self.n}")
        own = getattr(self.psi, "ell", None)
        if own is not None and own != self.ell:
            raise ValueError(f"ψ має ℓ={own}, а ядро ℓ={self.ell}")
        return self

    @property
    def order(self) -> int:
        return self.ell


KernelSpec = Annotated[Union[ProductSpec, OrderKSpec, SumCMSpec], Field(discriminator="family")]

_kernel_adapter = TypeAdapter(KernelSpec)


def parse_kernel_spec(document: Any) -> Union[ProductSpec, OrderKSpec, SumCMSpec]:
    """Перевірка JSON-документа ядра; помилки схеми стають KernelSpecError."""
    try:
        return _kernel_adapter.validate_python(document)
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or 'документ'}: {err['msg']}" for err in e.errors()
        )
        raise KernelSpecError(f"Некоректний опис ядра: {problems}") from e


def kernel_descriptor(spec: Union[ProductSpec, OrderKSpec, SumCMSpec]) -> dict:
    """Серіалізований опис ядра для звітів."""
    return spec.model_dump(mode="json")
