"Modules for automatic qLDPC predecoder construction and evaluation."
