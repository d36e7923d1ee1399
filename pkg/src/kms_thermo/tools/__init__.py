"""Session management tools package."""
