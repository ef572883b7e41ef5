"""Shipping fee rules."""

__all__ = ["shipping_fee"]


def shipping_fee(weight: float, zone: int, express: bool, member: bool) -> float:
    """Fee for one parcel."""
    fee = 0.0
    if weight > 10:
        fee += 5
    if weight > 20:
        fee += 5
    if zone == 1 and express:
        fee += 3
    if zone == 2 or member:
        fee += 2
    for _ in range(zone):
        fee += 1
    while fee > 100:
        fee -= 10
    fee = fee if member else fee * 1.1
    if express:
        fee *= 2
    return fee
