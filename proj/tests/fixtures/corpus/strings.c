#include <stdio.h>
#include <string.h>
#include <ctype.h>

static void reverse(char *s)
{
    size_t len = strlen(s);
    size_t i;
    for (i = 0; i < len / 2; i++) {
        char c = s[i];
        s[i] = s[len - 1 - i];
        s[len - 1 - i] = c;
    }
}

static int is_palindrome(const char *s)
{
    size_t left = 0;
    size_t right = strlen(s);
    if (right == 0)
        return 1;
    right--;
    while (left < right) {
        if (tolower((unsigned char)s[left]) != tolower((unsigned char)s[right]))
            return 0;
        left++;
        right--;
    }
    return 1;
}

static int count_vowels(const char *s)
{
    int count = 0;
    while (*s) {
        char c = (char)tolower((unsigned char)*s);
        if (c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u')
            count++;
        s++;
    }
    return count;
}

static void capitalize(char *s)
{
    int start = 1;
    for (; *s; s++) {
        if (isalpha((unsigned char)*s)) {
            if (start)
                *s = (char)toupper((unsigned char)*s);
            start = 0;
        } else {
            start = 1;
        }
    }
}

int main(void)
{
    char word[] = "Racecar";
    char line[] = "hello world from c";
    printf("%s palindrome: %d\n", word, is_palindrome(word));
    printf("vowels: %d\n", count_vowels(line));
    reverse(word);
    capitalize(line);
    printf("%s / %s\n", word, line);
    return 0;
}
