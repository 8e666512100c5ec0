"""codegraft: mine git histories for transplantable code additions.

The toolkit finds "adding" commits in a repository, labels the added code
(practical or not, what it contains, how hard it is to move), extracts the
context definitions it depends on (its vein), and ranks host classes to
receive the grafted result.
"""

__version__ = "0.1.0"
