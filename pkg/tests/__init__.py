# Auto-generated
