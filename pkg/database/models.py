from datetime import datetime

from sqlalchemy import DateTime, Integer, String, Text, UniqueConstraint, func
from sqlalchemy.ext.asyncio import AsyncAttrs
from sqlalchemy.orm import DeclarativeBase, Mapped, mapped_column


class Base(AsyncAttrs, DeclarativeBase):
    pass


class MetricRecord(Base):
    """A solved metric operator, stored as its metric.json payload."""
    __tablename__ = "metric_solutions"

    id: Mapped[int] = mapped_column(Integer, primary_key=True, autoincrement=True)
    mass: Mapped[str] = mapped_column(String, index=True)
    max_order: Mapped[int] = mapped_column(Integer)
    payload: Mapped[str] = mapped_column(Text)
    digest: Mapped[str] = mapped_column(String(32))
    created_at: Mapped[datetime] = mapped_column(DateTime, server_default=func.now())

    __table_args__ = (
        UniqueConstraint("mass", "max_order", name="uq_metric_mass_order"),
    )

    def __repr__(self) -> str:
        return f"<MetricRecord(M='{self.mass}', order={self.max_order})>"
