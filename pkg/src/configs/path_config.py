from schemas.path_schema import PathSchema

# Resolved once per process; `${path_config:run_log}` and `${path_config:run_outputs}`
# in settings.yaml read from this instance.
path_config = PathSchema()
