import os
import subprocess
import unittest


def find_checker():
    for name in ("pycodestyle", "pep8"):
        for path in os.environ.get("PATH", "").split(os.pathsep):
            if os.access(os.path.join(path, name), os.X_OK):
                return name
    return None


class PackagePep8TestCase(unittest.TestCase):

    def test_pep8(self):
        checker = find_checker()
        if checker is None:
            self.skipTest("neither pycodestyle nor pep8 is installed")
        py_dir = os.path.join(os.path.dirname(__file__), "..")
        res = subprocess.call(
            [checker,
             # E125, E126, E127, E128: continuation line indentation
             # W503, W504: line break around binary operators
             "--ignore=E125,E126,E127,E128,W503,W504",
             "--exclude", "build,examples,doc",
             "--repeat", py_dir])
        if res != 0:
            self.fail("%s failed with: %s" % (checker, res))


if __name__ == "__main__":
    unittest.main()
