# Core numerical engines
