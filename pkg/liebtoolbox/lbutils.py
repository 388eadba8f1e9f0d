"""A collection of functions used across liebtoolbox."""

from __future__ import division, print_function

import json
import os
import sys
import warnings
from textwrap import TextWrapper

import numpy as np
import pandas as pd
from tabulate import tabulate as tb

WRAPPER = TextWrapper(initial_indent="*   ", subsequent_indent="*   ")

CSV_FLOAT_FORMAT = "%.17g"


def error_wrapper(estr):
    """ Wrap estr into error format used by liebtoolbox. """
    nestr = ["", "*"]
    for paragraph in estr.split("\n\n"):
        nestr.append("\n".join(WRAPPER.wrap(paragraph.strip())))
        nestr.append("*")
    nestr.append("")
    return "\n".join(nestr)


class ValidationError(ValueError):
    """Invalid input, schema violation or failed precondition."""


class DimensionError(ValidationError):
    """Field length does not match the lattice."""


class CapacityError(ValidationError):
    """Many-body basis exceeds the dense capacity guard."""


class ContractError(ValidationError):
    """Operation called on a state it does not accept."""


class NumericalError(RuntimeError):
    """Numerical failure."""


class SingularGapError(NumericalError):
    """Spectral gap vanishes or does not exist."""


class SolverError(NumericalError):
    """Eigensolver output fails residual or orthonormality checks."""


class SlopeDegenerateError(NumericalError):
    """First order energy slopes coincide inside a degenerate manifold."""


class DegenerateGroundStateError(NumericalError):
    """Non-degenerate formula requested on a degenerate ground state."""


class LabWarning(UserWarning):
    """Base category of liebtoolbox warnings."""


class NearSingularWarning(LabWarning):
    """Response kernel has an eigenvalue close to zero."""


class RepresentabilityWarning(LabWarning):
    """Target density is a delicate candidate for inversion."""


class ConvergenceWarning(LabWarning):
    """Iteration stopped before reaching its tolerance."""


docstrings = {
    "config": r"""config : str
        Path to an INI style experiment configuration file.  If the path
        does not exist, the file stem is looked up in the preset catalog,
        so 'presets/cancellation_4ring.cfg' and 'cancellation_4ring' name
        the same packaged preset.""",
    "out": r"""out : str
        [optional, default is the '[output] dir' of the configuration or
        'results']

        Directory that receives one sub-directory per scenario with
        'result.json', 'metadata.json' and the CSV tables.""",
    "seed": r"""seed : int
        [optional, default is the '[scenario] seed' of the configuration]

        Seed of every random draw.  The same configuration and seed give
        byte-identical 'result.json' files.""",
    "quiet": r"""quiet
        [optional, default is False]

        Silence warnings and the printed summary.  Result files are still
        written.""",
    "tag": r"""tag : str
        [optional, default is None]

        Only select presets carrying this tag.  Known tags include 'ring',
        'chain', 'degenerate', 'conditioning', 'inversion', 'lieb' and
        'acceptance'.""",
    "name": r"""name : str
        [optional, default is None]

        Only select the preset with this name.""",
    "tablefmt": r"""tablefmt : str
        [optional, default is 'simple', output format]

        The table format.  Can be one of 'csv', 'tsv', 'plain',
        'simple', 'grid', 'pipe', 'orgtbl', 'rst', 'mediawiki', 'latex',
        'latex_raw' and 'latex_booktabs'.""",
}


def doc(fdict, **kwargs):
    """Return a decorator that formats a docstring."""

    def f(fn):
        fn.__doc__ = fn.__doc__.format(**fdict)
        for attr in kwargs:
            setattr(fn, attr, kwargs[attr])
        return fn

    return f


def make_list(*strorlist, **kwds):
    """Normalize strings, converting to numbers or lists."""
    try:
        n = kwds.pop("n")
    except KeyError:
        n = None
    if n is not None:
        n = int(n)

    try:
        sep = kwds.pop("sep")
    except KeyError:
        sep = ","

    try:
        kwdname = kwds.pop("kwdname")
    except KeyError:
        kwdname = ""

    if isinstance(strorlist, (list, tuple)):
        # The following will fix ((tuples, in, a, tuple, problem),)
        strorlist = list(pd.core.common.flatten(strorlist))
        if len(strorlist) == 1:
            # Normalize lists and tuples of length 1 to scalar for
            # further processing.
            strorlist = strorlist[0]

    if isinstance(strorlist, (list, tuple)):
        if n is not None:
            if len(strorlist) != n:
                raise ValueError(
                    error_wrapper(
                        """
The list {0} for "{2}" should have {1} members according to function requirements.
""".format(
                            strorlist, n, kwdname
                        )
                    )
                )

    try:
        strorlist = strorlist.strip()
    except AttributeError:
        pass

    if strorlist is None:
        return None

    if isinstance(strorlist, (int, float)):
        return [strorlist]

    if isinstance(strorlist, (str, bytes)) and (strorlist in ["None", ""]):
        return None

    if isinstance(strorlist, (str, bytes)):
        try:
            return [int(strorlist)]
        except ValueError:
            try:
                return [float(strorlist)]
            except ValueError:
                pass

    try:
        strorlist = strorlist.split(sep)
    except AttributeError:
        pass

    if n is None:
        n = len(strorlist)

    if len(strorlist) != n:
        raise ValueError(
            error_wrapper(
                """
The list {0} for "{2}" should have {1} members according to function requirements.
""".format(
                    strorlist, n, kwdname
                )
            )
        )

    ret = []
    for each in strorlist:
        if isinstance(each, (type(None), int, float)):
            ret.append(each)
            continue
        if each is None or each.strip() == "" or each == "None":
            ret.append(None)
            continue
        try:
            ret.append(int(each))
        except ValueError:
            try:
                ret.append(float(each))
            except ValueError:
                ret.append(each.strip())
    return ret


def make_float_array(values, kwdname="", n=None):
    """Coerce a comma separated string or sequence to a float array."""
    if isinstance(values, np.ndarray):
        arr = values.astype(float)
    else:
        items = make_list(values, n=n, kwdname=kwdname)
        if items is None or any(not isinstance(i, (int, float)) for i in items):
            raise ValidationError(
                error_wrapper(
                    """
The argument "{0}" must be a list of numbers.

You gave "{1}".
""".format(
                        kwdname, values
                    )
                )
            )
        arr = np.array(items, dtype=float)
    if n is not None and arr.shape != (n,):
        raise DimensionError(
            error_wrapper(
                """
The argument "{0}" should have {1} members.  You gave {2}.
""".format(
                    kwdname, n, arr.size
                )
            )
        )
    return arr


def Coerce(ntype, msg=None):
    """Coerce a value to a type.

    float:
        1     -> 1.0
        '1.1' -> 1.1
        '1,'  -> [1.0, None]
    int:
        1     -> 1
        '1'   -> 1
    str:
        1     -> '1'
    """

    def f(v):
        if v is None or v == "":
            return None
        if isinstance(v, str):
            if "," in v:
                v = v.split(",")
        try:
            if isinstance(v, (list, tuple, np.ndarray)):
                rl = []
                for i in v:
                    if i is None or i == "":
                        rl.append(i)
                    else:
                        rl.append(ntype(i))
                return rl
            return ntype(v)
        except (TypeError, ValueError):
            raise ValueError(msg or ("Cannot coerce {0} to {1}.".format(v, ntype)))

    return f


def _vhead(funcname, argname, nargs, nvar, vlen):
    if not isinstance(nvar, list):
        nvar = [nvar]
    if vlen is not None and len(nvar) != vlen:
        items = "item" if vlen == 1 else "items"
        raise ValueError(
            error_wrapper(
                """
The argument {argname} can only be {vlen} {items} long.

You gave {nvar}.
""".format(
                    **locals()
                )
            )
        )
    return nvar


def _vdomain(funcname, argname, nargs, nvar, vlen):
    nvar = _vhead(funcname, argname, nargs, nvar, vlen)
    for i in nvar:
        if i is None:
            continue
        if i not in nargs:
            raise ValueError(
                error_wrapper(
                    """
The argument "{argname}" should be one of the terms in {nargs}.

You gave "{i}".
""".format(
                        **locals()
                    )
                )
            )


def _vrange(funcname, argname, nargs, nvar, vlen):
    nvar = _vhead(funcname, argname, nargs, nvar, vlen)
    for i in nvar:
        if i is None:
            continue
        if nargs[0] is None:
            if i > nargs[1]:
                raise ValueError(
                    error_wrapper(
                        """
The argument "{1}" should be less than or equal to {4}.

You gave "{2}".
""".format(
                            funcname, argname, i, nargs[0], nargs[1]
                        )
                    )
                )
            continue
        if nargs[1] is None:
            if i < nargs[0]:
                raise ValueError(
                    error_wrapper(
                        """
The argument "{1}" should be greater than or equal to {3}.

You gave "{2}".
""".format(
                            funcname, argname, i, nargs[0], nargs[1]
                        )
                    )
                )
            continue
        if i < nargs[0] or i > nargs[1]:
            raise ValueError(
                error_wrapper(
                    """
The argument "{1}" should be between {3} to {4}, inclusive.

You gave "{2}".
""".format(
                        funcname, argname, i, nargs[0], nargs[1]
                    )
                )
            )


def _vpass(funcname, argname, nargs, nvar, vlen):
    pass


validator_func = {"domain": _vdomain, "range": _vrange, "pass": _vpass}


def check(funcname, argname, value, ctype, valid, nargs, vlen=1):
    """Run one validator check outside of the decorator.

    Raises ValidationError so that configuration parsing maps to exit
    code 2.
    """
    try:
        nvar = Coerce(ctype)(value)
        validator_func[valid](funcname, argname, nargs, nvar, vlen)
    except ValueError as e:
        raise ValidationError(str(e))
    return nvar


def validator(**argchecks):  # validate ranges for both+defaults
    def onDecorator(func):  # onCall remembers func and argchecks
        if not __debug__:  # True if "python -O main.py args.."
            return func  # wrap if debugging else use original
        code = func.__code__
        allargs = code.co_varnames[: code.co_argcount]
        funcname = func.__name__

        def onCall(*pargs, **kargs):
            # all pargs match first N args by position
            # the rest must be in kargs or omitted defaults
            positionals = list(allargs)
            positionals = positionals[: len(pargs)]

            for (argname, comb) in argchecks.items():
                collect_errors = []
                incomb = comb
                if callable(comb[0]):
                    incomb = [comb]
                for ctype, (valid, (nargs)), vlen in incomb:
                    # for all args to be checked
                    iffinally = True
                    if argname in kargs:
                        # was passed by name
                        cval = kargs[argname]
                    elif argname in positionals:
                        # was passed by position
                        position = positionals.index(argname)
                        cval = pargs[position]
                    else:
                        iffinally = False

                    if iffinally is True:
                        try:
                            nvar = Coerce(ctype)(cval)
                            validator_func[valid](funcname, argname, nargs, nvar, vlen)
                            collect_errors.append(None)
                            break
                        except ValueError as e:
                            collect_errors.append(str(e))
                if len(collect_errors) > 0 and all(collect_errors) is True:
                    raise ValidationError("\n\n".join(collect_errors))

            return func(*pargs, **kargs)  # okay: run original call

        onCall.__name__ = func.__name__
        onCall.__doc__ = func.__doc__
        return onCall

    return onDecorator


def printiso(tsd, float_format=".6g", headers="keys", tablefmt="simple"):
    """Print a DataFrame, a list of rows or a scalar as a table."""
    if isinstance(tsd, pd.Series):
        tsd = pd.DataFrame(tsd)

    if isinstance(tsd, (int, float, np.floating)):
        print(tsd)
        return

    if tablefmt == "csv" and isinstance(tsd, pd.DataFrame):
        try:
            tsd.to_csv(sys.stdout, float_format="%{0}".format(float_format), index=False)
        except IOError:
            pass
        return

    if not isinstance(tsd, pd.DataFrame) and headers == "keys":
        headers = ()

    print(
        tb(
            tsd,
            tablefmt=tablefmt,
            showindex="never",
            headers=headers,
            floatfmt=float_format,
        )
    )


def to_jsonable(obj):
    """Convert numpy containers and scalars for json.dump."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(i) for i in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        obj = float(obj)
        if not np.isfinite(obj):
            return repr(obj)
        return obj
    return obj


def write_json(payload, filename):
    """Write a payload with sorted keys so reruns are byte-identical."""
    with open(filename, "w") as fp:
        json.dump(to_jsonable(payload), fp, sort_keys=True, indent=2)
        fp.write("\n")
    return filename


def write_csv(frame, filename):
    """Write a DataFrame with a header row and 17 significant digits."""
    frame.to_csv(filename, float_format=CSV_FLOAT_FORMAT, index=False)
    return filename


def matrix_frame(matrix, prefix="r"):
    """Row-major DataFrame of a square matrix, one column per site."""
    matrix = np.asarray(matrix)
    columns = ["{0}{1}".format(prefix, j) for j in range(matrix.shape[1])]
    return pd.DataFrame(matrix, columns=columns)


def ensure_dir(path):
    """Create path if missing and return it."""
    os.makedirs(path, exist_ok=True)
    return path


def quiet_warnings(quiet):
    """Silence liebtoolbox warnings when quiet is set."""
    if quiet:
        warnings.simplefilter("ignore", LabWarning)
    else:
        warnings.simplefilter("default", LabWarning)


def about(name):
    """Return generic 'about' information."""
    for key, value in platform_info(name).items():
        print("{0} = {1}".format(key, value))


def platform_info(name):
    """Package and platform description used by 'about' and run metadata."""
    import platform

    import pkg_resources

    try:
        namever = str(pkg_resources.get_distribution(name.split(".")[0]))
        pkgname, pkgversion = namever.split()[:2]
    except pkg_resources.DistributionNotFound:
        pkgname, pkgversion = name.split(".")[0], "unknown"

    return {
        "package name": pkgname,
        "package version": pkgversion,
        "platform architecture": str(platform.architecture()),
        "platform machine": platform.machine(),
        "platform": platform.platform(),
        "platform python implementation": platform.python_implementation(),
        "platform python version": platform.python_version(),
        "numpy version": np.__version__,
        "pandas version": pd.__version__,
    }
