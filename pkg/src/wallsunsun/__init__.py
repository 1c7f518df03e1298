"""Search tools for Wall-Sun-Sun primes."""
