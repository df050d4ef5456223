"""Inspection lane counts at the three crossings, by direction and vehicle
type. The synthetic generator does not simulate lane capacity; these
constants are published for users who extend it with queueing behavior.

RB has no commercial lanes in either direction.
"""

from .ingest import Bridge, Direction, Vehicle

INSPECTION_LANES = {
    (Bridge.PB, Direction.TO_US, Vehicle.PASSENGER): 15,
    (Bridge.PB, Direction.TO_US, Vehicle.COMMERCIAL): 5,
    (Bridge.PB, Direction.TO_CAN, Vehicle.PASSENGER): 11,
    (Bridge.PB, Direction.TO_CAN, Vehicle.COMMERCIAL): 7,
    (Bridge.RB, Direction.TO_US, Vehicle.PASSENGER): 16,
    (Bridge.RB, Direction.TO_CAN, Vehicle.PASSENGER): 15,
    (Bridge.LQ, Direction.TO_US, Vehicle.PASSENGER): 6,
    (Bridge.LQ, Direction.TO_US, Vehicle.COMMERCIAL): 4,
    (Bridge.LQ, Direction.TO_CAN, Vehicle.PASSENGER): 10,
    (Bridge.LQ, Direction.TO_CAN, Vehicle.COMMERCIAL): 5,
}
