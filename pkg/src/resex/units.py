"""Unit helpers.

Frequencies quoted as kHz/MHz/GHz are angular frequencies: ``1 MHz`` means
``1e6 rad/s`` and enters ``exp(-i H t)`` directly with ``t`` in seconds.
"""

kHz = 1e3
MHz = 1e6
GHz = 1e9

ns = 1e-9
us = 1e-6
