# Command groups registered on the surface-lab CLI
