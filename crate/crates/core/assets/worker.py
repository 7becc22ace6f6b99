import sys, json, io, time, os, traceback, contextlib, inspect


def _trim_tb(exc):
    # Drop harness frames so tracebacks start at the solution file.
    tb = exc.__traceback__
    while tb is not None and tb.tb_frame.f_code.co_filename != "solution.py":
        tb = tb.tb_next
    parts = traceback.format_exception(type(exc), exc, tb or exc.__traceback__)
    text = "".join(parts)
    if len(text) > 8000:
        text = text[:4000] + "\n... [traceback truncated] ...\n" + text[-4000:]
    return text


def _main():
    req = json.load(sys.stdin)
    source = req["source"]
    symbols = req.get("symbols")
    mem = req.get("memory_bytes") or 0
    entry = req.get("entry") or "solve"
    denied = set(req.get("denied_modules") or [])
    if mem:
        try:
            import resource

            resource.setrlimit(resource.RLIMIT_AS, (mem, mem))
        except Exception:
            pass

    scratch = os.getcwd()
    import builtins

    real_import = builtins.__import__

    def guarded_import(name, globals=None, locals=None, fromlist=(), level=0):
        # Deny only imports issued by the solution itself; stdlib modules it
        # legitimately uses may pull in anything internally.
        caller = (globals or {}).get("__name__", "")
        if caller == "__solution__" and name.split(".")[0] in denied:
            raise ImportError("module '%s' is not available in the sandbox" % name)
        return real_import(name, globals, locals, fromlist, level)

    builtins.__import__ = guarded_import

    real_open = builtins.open

    def guarded_open(file, *args, **kwargs):
        try:
            path = os.fspath(file)
        except TypeError:
            raise PermissionError("sandbox: only path-based open() is allowed")
        if isinstance(path, bytes):
            path = path.decode(errors="replace")
        full = os.path.realpath(os.path.join(scratch, path))
        if full != scratch and not full.startswith(scratch + os.sep):
            raise PermissionError("sandbox: path outside scratch directory: %s" % path)
        return real_open(full, *args, **kwargs)

    builtins.open = guarded_open

    out = io.StringIO()
    result = {"status": "ok", "return": None, "stdout": "", "exc": "", "duration": 0.0}
    start = time.monotonic()
    try:
        code = compile(source, "solution.py", "exec")
        namespace = {"__name__": "__solution__"}
        with contextlib.redirect_stdout(out):
            exec(code, namespace)
            fn = namespace.get(entry)
            if fn is None or not callable(fn):
                result["status"] = "harness_error"
                result["exc"] = "entry function '%s' is not defined" % entry
            else:
                try:
                    sig = inspect.signature(fn)
                    takes_arg = any(
                        p.kind
                        in (p.POSITIONAL_ONLY, p.POSITIONAL_OR_KEYWORD, p.VAR_POSITIONAL)
                        for p in sig.parameters.values()
                    )
                except (TypeError, ValueError):
                    takes_arg = True
                result["return"] = fn(symbols) if takes_arg else fn()
    except SyntaxError as exc:
        result["status"] = "harness_error"
        result["exc"] = "".join(traceback.format_exception_only(type(exc), exc))
    except MemoryError:
        result["status"] = "resource_exhausted"
        result["exc"] = "MemoryError: memory limit exceeded"
        result["return"] = None
    except BaseException as exc:
        result["status"] = "exception"
        result["exc"] = _trim_tb(exc)
        result["return"] = None

    result["duration"] = time.monotonic() - start
    text = out.getvalue()
    if len(text) > 65536:
        text = text[:65536] + "\n... [stdout truncated]"
    result["stdout"] = text

    if result["status"] == "ok":
        try:
            json.dumps(result["return"], allow_nan=False)
        except (TypeError, ValueError):
            result["status"] = "harness_error"
            result["exc"] = (
                "return value of type %s is not JSON-serializable; return a scalar "
                "or a tree of lists/dicts/strings/finite numbers"
                % type(result["return"]).__name__
            )
            result["return"] = None

    try:
        sys.stdout.write(json.dumps(result))
    except (TypeError, ValueError):
        sys.stdout.write(
            json.dumps(
                {
                    "status": "harness_error",
                    "return": None,
                    "stdout": "",
                    "exc": "worker could not serialize the run outcome",
                    "duration": result["duration"],
                }
            )
        )
    sys.stdout.flush()


_main()
