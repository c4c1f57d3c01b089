"""Interface-synchronization middleware: capture operator inputs, map them
to ordered UI-event sequences, and replay them on remote virtual screens
over encrypted persistent connections."""

__version__ = "0.1.0"
