# Batch jobs over generated instances
