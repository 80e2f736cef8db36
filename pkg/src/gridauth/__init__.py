"""Smart-grid mutual authentication with ECC and biometrics."""
